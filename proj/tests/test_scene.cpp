#include <stdexcept>

#include "coprep/scene.hpp"
#include "doctest.h"

using namespace coprep;

namespace {

SceneParams two_by_two_params() {
  SceneParams p;
  p.patterns[1] = PatternParams{};
  p.patterns[2] = PatternParams{};
  p.plane_lines.emplace(1, HomLine(Vec3d(0, 0, 1)));
  p.plane_lines.emplace(2, HomLine(Vec3d(1e-3, 0, 1)));
  p.num_groups = 2;
  p.num_surfaces = 2;
  return p;
}

}  // namespace

TEST_CASE("keypoint labels reject grouped background") {
  CHECK(KeypointLabel().group() == kNoGroup);
  CHECK(KeypointLabel().surface() == kBackground);
  CHECK_NOTHROW(KeypointLabel(0, 2));  // planar singleton
  CHECK_NOTHROW(KeypointLabel(3, 1));
  CHECK_THROWS_AS(KeypointLabel(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(KeypointLabel(-1, 1), std::invalid_argument);
  CHECK(KeypointLabel(1, 2) == KeypointLabel(1, 2));
  CHECK(KeypointLabel(1, 2) != KeypointLabel(2, 1));
}

TEST_CASE("label universe enumerates grouped, singleton, and background labels") {
  const LabelUniverse u = make_universe(two_by_two_params());
  REQUIRE(u.size() == 7);

  // Grouped labels plane-major, then per-plane singletons, then background.
  CHECK(u.labels[0] == CompositeLabel{1, 1});
  CHECK(u.labels[1] == CompositeLabel{2, 1});
  CHECK(u.labels[2] == CompositeLabel{1, 2});
  CHECK(u.labels[3] == CompositeLabel{2, 2});
  CHECK(u.labels[4] == CompositeLabel{0, 1});
  CHECK(u.labels[5] == CompositeLabel{0, 2});
  CHECK(u.labels[6] == CompositeLabel{0, 0});

  CHECK(u.plane_class(1) == std::vector<int>{0, 1, 4});
  CHECK(u.plane_class(2) == std::vector<int>{2, 3, 5});
  CHECK(u.pattern_class(1) == std::vector<int>{0, 2});
  CHECK(u.pattern_class(2) == std::vector<int>{1, 3});
  CHECK(u.plane_class(kBackground).empty());
  CHECK(u.pattern_class(kNoGroup).empty());

  for (int i = 0; i < u.size(); ++i) CHECK(u.index_of(u.labels[i]) == i);
  CHECK(u.index_of(CompositeLabel{5, 1}) == -1);
}

TEST_CASE("repeat groups partition grouped keypoints by (group, surface)") {
  JointLabeling y;
  y.keypoints = {KeypointLabel(1, 1), KeypointLabel(2, 1), KeypointLabel(1, 1), KeypointLabel(0, 1),
                 KeypointLabel(),     KeypointLabel(1, 2)};
  const std::vector<RepeatGroup> groups = coplanar_repeat_groups(y);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0].group == 1);
  CHECK(groups[0].surface == 1);
  CHECK(groups[0].members == std::vector<int>{0, 2});
  CHECK(groups[1].group == 1);
  CHECK(groups[1].surface == 2);
  CHECK(groups[1].members == std::vector<int>{5});
  CHECK(groups[2].group == 2);
  CHECK(groups[2].members == std::vector<int>{1});
}

TEST_CASE("surface components split at label changes") {
  JointLabeling y;
  y.regions = {RegionLabel{1}, RegionLabel{1}, RegionLabel{0}, RegionLabel{1}, RegionLabel{1}};
  // Chain 0-1-2-3-4: the background region 2 splits the two plane runs.
  const std::vector<std::array<int, 2>> adj = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  const auto comps = connected_surface_components(y, adj, 5);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<int>{0, 1});
  CHECK(comps[1] == std::vector<int>{2});
  CHECK(comps[2] == std::vector<int>{3, 4});
}
