#pragma once

#include <vector>

#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

// Reference annotation of one planar patch: its vanishing line and the
// keypoints known to lie on it.
struct AnnotatedPlane {
  HomLine line;
  std::vector<int> keypoints;
};

struct Affine2 {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Vec2d offset = Vec2d::Zero();
  Vec2d apply(const Vec2d& p) const { return linear * p + offset; }
};

// Least-squares affinity src -> dst. Throws DegenerateCorrespondences when
// fewer than three pairs are given or the sources are collinear.
Affine2 fit_affine(const std::vector<Vec2d>& src, const std::vector<Vec2d>& dst);

// Residual distortion between two rectifications of the same patch, in
// original-image pixels. Each member frame point x is rewarped through
// annotated^-1 (A^-1 (detected x)), where A is the affinity fitted from the
// annotated-rectified to the detected-rectified point cloud, and the RMS
// distance to x is returned. Zero exactly when the two rectifications
// differ by an affinity applied after rectification. Throws MapsToInfinity
// when a point lands on an ideal line along the way.
double delta_rms(const SceneData& data, const std::vector<int>& members, const Mat3d& detected,
                 const Mat3d& annotated);

// Same metric with both rectifications built from vanishing lines.
double delta_rms(const SceneData& data, const std::vector<int>& members, const HomLine& detected,
                 const HomLine& annotated);

// For each annotated plane, the detected surface with the largest coverage
// |D cap A| / |D| of its keypoints, requiring nonzero overlap; ties prefer
// the larger detected support, then the lower surface id. 0 = unmatched.
std::vector<int> match_planes(const JointLabeling& y, const std::vector<AnnotatedPlane>& annotated);

// Per annotated plane: delta_rms against its matched detection's line; +inf
// when unmatched, the matched surface has no line, or a point is sent to
// infinity.
std::vector<double> evaluate_rectifications(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                                            const std::vector<AnnotatedPlane>& annotated);

// Fraction of values at or below each threshold, in threshold order.
std::vector<double> distortion_cdf(const std::vector<double>& deltas, const std::vector<double>& thresholds);

}  // namespace coprep
