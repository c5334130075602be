#include <cmath>
#include <vector>

#include "coprep/energy.hpp"
#include "coprep/proposals.hpp"
#include "coprep/regression.hpp"
#include "coprep/synth.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace coprep;
using testutil::make_plane_fixture;
using testutil::PlaneFixture;

namespace {

double angle_between(const Vec3d& a, const Vec3d& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

}  // namespace

TEST_CASE("leader clustering groups by founder distance, largest first") {
  SceneData data;
  data.descriptor_dim = 4;
  const VecXd e0 = testutil::axis_descriptor(4, 0);
  const VecXd e1 = testutil::axis_descriptor(4, 1);
  const VecXd e2 = testutil::axis_descriptor(4, 2);
  const VecXd e3 = testutil::axis_descriptor(4, 3);

  auto near = [](const VecXd& base, const VecXd& off, double eps) { return (base + eps * off).normalized(); };
  // Founders in scan order: 0 (e1 family), 1 (e0 family), 5 (e2 lone).
  std::vector<VecXd> descs = {e1, e0, near(e0, e3, 0.1), near(e1, e3, 0.12), near(e0, e2, 0.15), e2, near(e0, e1, 0.2)};
  double x = 50;
  for (const VecXd& d : descs) {
    data.keypoints.push_back(testutil::tri_keypoint(x, 80, 8, 0.1, d));
    x += 60;
  }
  finalize_scene(data);

  const auto clusters = cluster_descriptors(data, 0.35, 2);
  REQUIRE(clusters.size() == 2);
  // e0's family {1, 2, 4, 6} outnumbers e1's {0, 3}; the lone e2 is dropped.
  CHECK(clusters[0] == std::vector<int>{1, 2, 4, 6});
  CHECK(clusters[1] == std::vector<int>{0, 3});

  // Raising the minimum size filters the smaller family too.
  CHECK(cluster_descriptors(data, 0.35, 3).size() == 1);
}

TEST_CASE("two exact pairs pin down the planted line") {
  const PlaneFixture f = make_plane_fixture(8);
  const auto line = line_from_two_pairs(f.data, {f.groups[0][0], f.groups[0][1]}, {f.groups[0][2], f.groups[0][3]});
  REQUIRE(line.has_value());
  CHECK(angle_between(line->coords(), f.true_line) < 1e-6);
  // Consensus orientation keeps the keypoints on the positive side.
  CHECK(line->coords().dot(f.true_line) > 0.0);
  for (int i : f.groups[0]) CHECK(same_side(*line, f.data.keypoints[i]));
}

TEST_CASE("degenerate pair constraints are refused") {
  const PlaneFixture f = make_plane_fixture(9);
  // The same pair twice gives two parallel constraints.
  CHECK_FALSE(line_from_two_pairs(f.data, {f.groups[0][0], f.groups[0][1]}, {f.groups[0][0], f.groups[0][1]})
                  .has_value());
  // A keypoint paired with itself has coincident scaled centroids.
  CHECK_FALSE(line_from_two_pairs(f.data, {f.groups[0][0], f.groups[0][0]}, {f.groups[0][2], f.groups[0][3]})
                  .has_value());
}

TEST_CASE("sampled lines agree with an exhaustive direction grid") {
  const PlaneFixture f = make_plane_fixture(10, Vec3d(9e-4, -5e-4, 1.0));
  const auto sampled =
      line_from_two_pairs(f.data, {f.groups[1][0], f.groups[1][1]}, {f.groups[1][2], f.groups[1][3]});
  REQUIRE(sampled.has_value());
  const HomLine grid = grid_search_line(f.data, f.groups, 64);

  // The algebraic construction is exact up to conditioning, so it can only
  // beat the grid.
  const double sampled_obj = vline_objective(sampled->coords(), f.data, f.groups);
  const double grid_obj = vline_objective(grid.coords(), f.data, f.groups);
  CHECK(sampled_obj < 1e-8);
  CHECK(sampled_obj <= grid_obj + 1e-9);
  CHECK(angle_between(sampled->coords(), grid.coords()) < 5.0 * std::numbers::pi / 180.0);
}

TEST_CASE("line support counts coherent cluster inliers") {
  PlaneFixture f = make_plane_fixture(11);
  const HomLine line(f.true_line);
  CHECK(verify_line(f.data, line, f.groups, 0.2) == 8);

  // A scattered cluster contributes nothing: every member is its own scale.
  const Mat3d rect_inv = rectifier_from_line(line).transpose();
  std::vector<int> scattered;
  const double wild_areas[3] = {20.0, 90.0, 400.0};
  for (int m = 0; m < 3; ++m) {
    scattered.push_back(static_cast<int>(f.data.keypoints.size()));
    f.data.keypoints.push_back(testutil::planted(rect_inv, Vec2d(150.0 + 90.0 * m, 300.0), wild_areas[m], 0.4,
                                                 testutil::axis_descriptor(8, 5)));
  }
  finalize_scene(f.data);
  std::vector<std::vector<int>> clusters = f.groups;
  clusters.push_back(scattered);
  CHECK(verify_line(f.data, line, clusters, 0.2) == 8);

  // Nothing sits on the positive side of the flipped line.
  CHECK(verify_line(f.data, line.flipped(), f.groups, 0.2) == 0);
}

TEST_CASE("bootstrap on a synthetic scene is feasible and deterministic") {
  SynthSpec spec;
  spec.width = 480;
  spec.height = 480;
  spec.grid = 6;
  spec.sigma_pos = 0.1;
  spec.sigma_desc = 0.02;
  spec.seed = 3;
  for (int p = 0; p < 2; ++p) {
    PlaneSpec pl;
    pl.line = Vec3d(p == 0 ? 8e-4 : -6e-4, 4e-4, 1.0);
    pl.repeat_count = 10;
    pl.num_patterns = 2;
    spec.planes.push_back(pl);
  }
  const SynthResult scene = generate(spec);

  ProposalConfig cfg;
  cfg.seed = 17;
  const Proposal prop = propose(scene.data, cfg);

  EnergyWeights w;
  CHECK(labeling_feasible(scene.data, prop.labeling, prop.params, w));
  const double energy = total_energy(scene.data, prop.labeling, prop.params, w);
  CHECK(std::isfinite(energy));
  CHECK(!prop.params.plane_lines.empty());
  CHECK(prop.params.plane_lines.size() <= static_cast<std::size_t>(cfg.max_planes));
  CHECK(prop.params.surface_gmms.count(0) == 1);

  const Proposal again = propose(scene.data, cfg);
  CHECK(again.labeling.keypoints == prop.labeling.keypoints);
  CHECK(again.labeling.regions == prop.labeling.regions);
  CHECK(total_energy(scene.data, again.labeling, again.params, w) == energy);
}

TEST_CASE("too little structure falls back to the all-background proposal") {
  SceneData data;
  data.descriptor_dim = 4;
  for (int i = 0; i < 3; ++i) {
    data.keypoints.push_back(testutil::tri_keypoint(80.0 + 70.0 * i, 90, 9, 0.2, testutil::axis_descriptor(4, i)));
  }
  Region r;
  r.centroid = Vec2d(150, 90);
  r.pixel_count = 100;
  r.samples = {Vec3d(0.4, 0.5, 0.6), Vec3d(0.45, 0.5, 0.55)};
  data.regions.push_back(r);
  finalize_scene(data);

  const Proposal prop = propose(data, ProposalConfig{});
  for (const KeypointLabel& l : prop.labeling.keypoints) CHECK(l == KeypointLabel{});
  for (const RegionLabel& l : prop.labeling.regions) CHECK(l.surface == kBackground);
  CHECK(prop.params.plane_lines.empty());
  CHECK(prop.params.surface_gmms.count(0) == 1);
  EnergyWeights w;
  CHECK(labeling_feasible(data, prop.labeling, prop.params, w));
}
