#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "coprep/error.hpp"
#include "coprep/types.hpp"

namespace coprep {

// Homogeneous image point. Finite points are kept with third coordinate 1.
using HomPoint = Vec3d;

// Returns p scaled to unit Euclidean norm. Throws on zero or non-finite input.
template <typename Scalar>
Vec3<Scalar> normalized_representative(const Vec3<Scalar>& p) {
  const Scalar n = p.norm();
  if (!(n > Scalar(0)) || !std::isfinite(static_cast<double>(n))) {
    throw Error("homogeneous vector has zero or non-finite norm");
  }
  return p / n;
}

// True when the unit representative of p has third coordinate magnitude
// above kHomEps, i.e. p names a finite image point.
template <typename Scalar>
bool is_finite_point(const Vec3<Scalar>& p) {
  return std::abs(normalized_representative(p).z()) > Scalar(kHomEps);
}

template <typename Scalar>
Vec2<Scalar> dehomogenize(const Vec3<Scalar>& p) {
  const Vec3<Scalar> u = normalized_representative(p);
  if (std::abs(u.z()) <= Scalar(kHomEps)) throw MapsToInfinity("point at infinity cannot be dehomogenized");
  return {u.x() / u.z(), u.y() / u.z()};
}

template <typename Scalar>
Scalar signed_triangle_area(const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& c) {
  return Scalar(0.5) * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

template <typename Scalar>
Mat3<Scalar> skew(const Vec3<Scalar>& v) {
  Mat3<Scalar> m;
  m << Scalar(0), -v.z(), v.y(), v.z(), Scalar(0), -v.x(), -v.y(), v.x(), Scalar(0);
  return m;
}

// Rotation taking the unit vector a to (0, 0, 1). Its third row equals a^T.
template <typename Scalar>
Mat3<Scalar> rotation_to_z(const Vec3<Scalar>& a) {
  const Vec3<Scalar> e3(Scalar(0), Scalar(0), Scalar(1));
  const Scalar c = a.z();
  if (c <= Scalar(-1) + Scalar(1e-9)) {
    // Near-antipodal: rotate by pi about x first, then align the result.
    Mat3<Scalar> flip = Mat3<Scalar>::Identity();
    flip(1, 1) = Scalar(-1);
    flip(2, 2) = Scalar(-1);
    return rotation_to_z<Scalar>(flip * a) * flip;
  }
  const Vec3<Scalar> v = a.cross(e3);
  const Mat3<Scalar> vx = skew(v);
  return Mat3<Scalar>::Identity() + vx + vx * vx / (Scalar(1) + c);
}

// Oriented image line stored with unit Euclidean norm. The sign is preserved:
// l and -l describe the same point set but opposite positive sides.
class HomLine {
 public:
  explicit HomLine(const Vec3d& coords) : coords_(normalized_representative(coords)) {}
  const Vec3d& coords() const { return coords_; }
  double signed_side(const HomPoint& p) const { return coords_.dot(p); }
  HomLine flipped() const { return HomLine(-coords_); }

 private:
  Vec3d coords_;
};

// Local feature: an affine frame of three non-collinear finite points, a unit
// descriptor, and an optional mean patch color in [0,1]^3.
struct Keypoint {
  std::array<HomPoint, 3> frame;  // stored with third coordinate 1
  VecXd descriptor;
  std::optional<Vec3d> color;
};

// Validating factory: frame points finite and non-collinear (|area| > 1e-9),
// descriptor within 1e-6 of unit norm, color components in [0,1].
Keypoint make_keypoint(const std::array<Vec3d, 3>& frame, VecXd descriptor,
                       std::optional<Vec3d> color = std::nullopt);

double signed_keypoint_area(const Keypoint& k);

// Absolute area of the dehomogenized frame triangle. Affine-covariant:
// applying an affinity A multiplies it by |det of A's 2x2 block|.
double keypoint_scale(const Keypoint& k);

// Homogeneous centroid of the frame, third coordinate 1.
HomPoint keypoint_centroid(const Keypoint& k);

// Affine rectifier: a pure rotation whose third row equals the unit line, so
// points on the line map to ideal points and the line maps to the line at
// infinity. Orthogonal by construction, hence always invertible and
// perfectly conditioned; its inverse is its transpose.
Mat3d rectifier_from_line(const HomLine& l);

// Maps each frame point through H and renormalizes to third coordinate 1.
// Throws MapsToInfinity when a mapped point lands within kHomEps of the
// ideal line. Descriptor and color are carried over unchanged.
Keypoint apply_homography(const Mat3d& h, const Keypoint& k);

// True when every frame point x satisfies l^T x > 0 for the stored
// representatives (frame points have third coordinate 1).
bool same_side(const HomLine& l, const Keypoint& k);

// log of the keypoint's scale after rectification by rectifier_from_line(l).
// Requires same_side(l, k); throws SideViolation otherwise.
double rectified_log_scale(const HomLine& l, const Keypoint& k);

// Closed form of the same quantity: log s(k) - sum_w log(l_hat^T x_w).
// Matches rectified_log_scale to floating-point accuracy; this route is the
// one differentiated analytically during line refinement.
double rectified_log_scale_direct(const Vec3d& line, const Keypoint& k);

}  // namespace coprep
