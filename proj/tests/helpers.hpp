#pragma once

// Small hand-built inputs shared across test binaries.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "coprep/energy.hpp"
#include "coprep/rng.hpp"
#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace testutil {

inline coprep::VecXd axis_descriptor(int dim, int axis) {
  coprep::VecXd d = coprep::VecXd::Zero(dim);
  d[axis] = 1.0;
  return d;
}

// Equilateral triangle frame: center, circumradius, rotation. Its area is
// (3 sqrt(3) / 4) r^2.
inline coprep::Keypoint tri_keypoint(double cx, double cy, double r, double angle, coprep::VecXd desc,
                                     std::optional<coprep::Vec3d> color = std::nullopt) {
  std::array<coprep::Vec3d, 3> frame;
  for (int w = 0; w < 3; ++w) {
    const double a = angle + 2.0 * std::numbers::pi * w / 3.0;
    frame[w] = coprep::Vec3d(cx + r * std::cos(a), cy + r * std::sin(a), 1.0);
  }
  return coprep::make_keypoint(frame, std::move(desc), color);
}

// Plants an equilateral frame with the given area in the rectified space of
// line l and maps it back to the image, so its rectified log scale under l
// is exactly log(area).
inline coprep::Keypoint planted(const coprep::Mat3d& rect_inv, const coprep::Vec2d& center, double area,
                               double angle, coprep::VecXd desc) {
  const double r = std::sqrt(area * 4.0 / (3.0 * std::sqrt(3.0)));
  std::array<coprep::Vec3d, 3> frame;
  for (int w = 0; w < 3; ++w) {
    const double a = angle + 2.0 * std::numbers::pi * w / 3.0;
    const coprep::Vec3d rect(center.x() + r * std::cos(a), center.y() + r * std::sin(a), 1.0);
    const coprep::Vec2d img = coprep::dehomogenize<double>(rect_inv * rect);
    frame[w] = coprep::Vec3d(img.x(), img.y(), 1.0);
  }
  return coprep::make_keypoint(frame, std::move(desc));
}

// Noise-free keypoints planted on one slanted plane: group g holds
// `per_group` members of identical rectified area areas[g], so the planted
// line zeroes the scale dispersion exactly. Group g's descriptors all equal
// axis g, so descriptor clustering recovers the groups too.
struct PlaneFixture {
  coprep::SceneData data;
  std::vector<std::vector<int>> groups;
  coprep::Vec3d true_line;
};

inline PlaneFixture make_plane_fixture(std::uint64_t seed, const coprep::Vec3d& line = coprep::Vec3d(4e-4, -2e-4, 1.0),
                                       const std::vector<double>& areas = {50.0, 80.0}, int per_group = 4) {
  PlaneFixture f;
  f.true_line = line.normalized();
  const coprep::Mat3d rect_inv = coprep::rectifier_from_line(coprep::HomLine(f.true_line)).transpose();
  coprep::Rng rng(seed);
  const int dim = 8;
  f.data.descriptor_dim = dim;
  f.groups.resize(areas.size());
  for (std::size_t g = 0; g < areas.size(); ++g) {
    for (int m = 0; m < per_group; ++m) {
      const coprep::Vec2d c(rng.uniform(60, 450), rng.uniform(60, 450));
      f.groups[g].push_back(static_cast<int>(f.data.keypoints.size()));
      f.data.keypoints.push_back(
          planted(rect_inv, c, areas[g], rng.uniform(0, 6), axis_descriptor(dim, static_cast<int>(g))));
    }
  }
  coprep::finalize_scene(f.data);
  return f;
}

// Fronto-parallel plane 1 with a two-member repeat group, one planar
// singleton, one background keypoint, three regions, and consistent
// parameters. The labeling `gt` is feasible under `params`.
struct HandScene {
  coprep::SceneData data;
  coprep::SceneParams params;
  coprep::JointLabeling gt;
};

inline HandScene make_hand_scene() {
  HandScene s;
  const int dim = 4;
  const coprep::VecXd e0 = axis_descriptor(dim, 0);
  const coprep::VecXd e1 = axis_descriptor(dim, 1);
  coprep::VecXd mix = (e0 + e1) / std::numbers::sqrt2;

  s.data.descriptor_dim = dim;
  s.data.keypoints.push_back(tri_keypoint(100, 100, 10, 0.0, e0, coprep::Vec3d(0.8, 0.2, 0.2)));
  s.data.keypoints.push_back(tri_keypoint(140, 100, 11, 0.3, e0, coprep::Vec3d(0.7, 0.3, 0.2)));
  s.data.keypoints.push_back(tri_keypoint(300, 100, 9, 1.0, e1));
  s.data.keypoints.push_back(tri_keypoint(450, 100, 12, 2.0, std::move(mix), coprep::Vec3d(0.1, 0.2, 0.9)));

  coprep::Region r0;
  r0.centroid = coprep::Vec2d(120, 100);
  r0.pixel_count = 50;
  r0.samples = {coprep::Vec3d(0.8, 0.2, 0.2), coprep::Vec3d(0.7, 0.3, 0.2)};
  coprep::Region r1;
  r1.centroid = coprep::Vec2d(300, 100);
  r1.pixel_count = 40;
  r1.samples = {coprep::Vec3d(0.75, 0.25, 0.2)};
  coprep::Region r2;
  r2.centroid = coprep::Vec2d(450, 120);
  r2.pixel_count = 60;
  r2.samples = {coprep::Vec3d(0.1, 0.2, 0.9)};
  s.data.regions = {r0, r1, r2};

  s.data.region_edges.push_back({0, 1, 0.5});
  s.data.region_edges.push_back({1, 2, 2.0});
  s.data.overlap_pairs = {{0, 0}, {1, 0}, {2, 1}, {3, 2}};
  coprep::finalize_scene(s.data);

  const double z0 = std::log(coprep::keypoint_scale(s.data.keypoints[0]));
  const double z1 = std::log(coprep::keypoint_scale(s.data.keypoints[1]));

  coprep::PatternParams pat;
  pat.mean_descriptor = e0;
  pat.mean_log_rect_scale[1] = 0.5 * (z0 + z1);
  s.params.patterns[1] = pat;
  s.params.plane_lines.emplace(1, coprep::HomLine(coprep::Vec3d(0, 0, 1)));

  coprep::GmmComponent plane_comp;
  plane_comp.mean = coprep::Vec3d(0.75, 0.25, 0.2);
  plane_comp.cov = 0.05 * coprep::Mat3d::Identity();
  coprep::GmmComponent bg_comp;
  bg_comp.mean = coprep::Vec3d(0.1, 0.2, 0.9);
  bg_comp.cov = 0.05 * coprep::Mat3d::Identity();
  s.params.surface_gmms[0] = coprep::SurfaceGmm{{bg_comp}};
  s.params.surface_gmms[1] = coprep::SurfaceGmm{{plane_comp}};
  s.params.num_groups = 1;
  s.params.num_surfaces = 1;

  s.gt.keypoints = {coprep::KeypointLabel(1, 1), coprep::KeypointLabel(1, 1), coprep::KeypointLabel(0, 1),
                    coprep::KeypointLabel()};
  s.gt.regions = {coprep::RegionLabel{1}, coprep::RegionLabel{1}, coprep::RegionLabel{0}};
  return s;
}

}  // namespace testutil
