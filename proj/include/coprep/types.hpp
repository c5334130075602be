#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace coprep {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec2d = Eigen::Vector2d;
using Vec3d = Eigen::Vector3d;
using Mat3d = Eigen::Matrix3d;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;

// Sentinel cost for (site, label) assignments excluded from a move. Large
// enough to dominate any real energy, small enough that a handful of them
// summed stays finite in double arithmetic.
inline constexpr double kInfCost = 1e12;

// Absolute threshold for homogeneous comparisons, applied to the
// unit-normalized representative.
inline constexpr double kHomEps = 1e-12;

inline constexpr int kDefaultDescriptorDim = 128;

}  // namespace coprep
