#include "coprep/geometry.hpp"

#include <cmath>

namespace coprep {

namespace {

Vec3d to_finite(const Vec3d& p) {
  if (p.z() == 1.0) return p;  // already reduced; reloading must not move the bits
  const Vec2d xy = dehomogenize(p);
  return {xy.x(), xy.y(), 1.0};
}

}  // namespace

Keypoint make_keypoint(const std::array<Vec3d, 3>& frame, VecXd descriptor, std::optional<Vec3d> color) {
  Keypoint k;
  for (int w = 0; w < 3; ++w) k.frame[w] = to_finite(frame[w]);
  const double area = signed_triangle_area<double>(k.frame[0].head<2>(), k.frame[1].head<2>(), k.frame[2].head<2>());
  if (std::abs(area) <= 1e-9) throw Error("keypoint frame is collinear");
  if (descriptor.size() == 0) throw Error("keypoint descriptor is empty");
  if (std::abs(descriptor.norm() - 1.0) > 1e-6) throw Error("keypoint descriptor is not unit norm");
  k.descriptor = std::move(descriptor);
  if (color) {
    for (int c = 0; c < 3; ++c) {
      if (!((*color)[c] >= 0.0 && (*color)[c] <= 1.0)) throw Error("keypoint color outside [0,1]");
    }
    k.color = color;
  }
  return k;
}

double signed_keypoint_area(const Keypoint& k) {
  std::array<Vec2d, 3> p;
  for (int w = 0; w < 3; ++w) p[w] = dehomogenize(k.frame[w]);
  return signed_triangle_area<double>(p[0], p[1], p[2]);
}

double keypoint_scale(const Keypoint& k) { return std::abs(signed_keypoint_area(k)); }

HomPoint keypoint_centroid(const Keypoint& k) {
  Vec2d c = Vec2d::Zero();
  for (int w = 0; w < 3; ++w) c += dehomogenize(k.frame[w]);
  c /= 3.0;
  return {c.x(), c.y(), 1.0};
}

Mat3d rectifier_from_line(const HomLine& l) { return rotation_to_z<double>(l.coords()); }

Keypoint apply_homography(const Mat3d& h, const Keypoint& k) {
  Keypoint out;
  for (int w = 0; w < 3; ++w) {
    const Vec3d q = normalized_representative<double>(h * k.frame[w]);
    if (std::abs(q.z()) <= kHomEps) throw MapsToInfinity("frame point maps to infinity");
    out.frame[w] = q / q.z();
  }
  out.descriptor = k.descriptor;
  out.color = k.color;
  return out;
}

bool same_side(const HomLine& l, const Keypoint& k) {
  for (int w = 0; w < 3; ++w) {
    if (!(l.signed_side(k.frame[w]) > 0.0)) return false;
  }
  return true;
}

double rectified_log_scale(const HomLine& l, const Keypoint& k) {
  if (!same_side(l, k)) throw SideViolation("keypoint frame crosses the rectifying line");
  return std::log(keypoint_scale(apply_homography(rectifier_from_line(l), k)));
}

double rectified_log_scale_direct(const Vec3d& line, const Keypoint& k) {
  const Vec3d l = normalized_representative(line);
  double z = std::log(keypoint_scale(k));
  for (int w = 0; w < 3; ++w) {
    const double d = l.dot(k.frame[w]);
    if (!(d > 0.0)) throw SideViolation("keypoint frame crosses the rectifying line");
    z -= std::log(d);
  }
  return z;
}

}  // namespace coprep
