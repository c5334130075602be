#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "coprep/geometry.hpp"
#include "coprep/types.hpp"

namespace coprep {

// Ids are 1-based. Group 0 means "does not repeat"; surface 0 is background.
inline constexpr int kNoGroup = 0;
inline constexpr int kBackground = 0;

// Per-keypoint label (group, surface). A repeating keypoint must sit on a
// plane, so group > 0 with surface 0 is rejected at construction.
class KeypointLabel {
 public:
  KeypointLabel() = default;
  KeypointLabel(int group, int surface) : group_(group), surface_(surface) {
    if (group < 0 || surface < 0) throw std::invalid_argument("negative label id");
    if (group > 0 && surface == kBackground) throw std::invalid_argument("repeating keypoint cannot be background");
  }
  int group() const { return group_; }
  int surface() const { return surface_; }
  friend bool operator==(const KeypointLabel& a, const KeypointLabel& b) {
    return a.group_ == b.group_ && a.surface_ == b.surface_;
  }
  friend bool operator!=(const KeypointLabel& a, const KeypointLabel& b) { return !(a == b); }

 private:
  int group_ = kNoGroup;
  int surface_ = kBackground;
};

struct RegionLabel {
  int surface = kBackground;
  friend bool operator==(const RegionLabel& a, const RegionLabel& b) { return a.surface == b.surface; }
  friend bool operator!=(const RegionLabel& a, const RegionLabel& b) { return !(a == b); }
};

struct JointLabeling {
  std::vector<KeypointLabel> keypoints;
  std::vector<RegionLabel> regions;
};

// Statistics of one repeating pattern: mean descriptor pooled over all its
// keypoints, and per-surface mean log rectified scale (surface id -> mean).
struct PatternParams {
  VecXd mean_descriptor;
  std::map<int, double> mean_log_rect_scale;
};

struct GmmComponent {
  Vec3d mean = Vec3d::Zero();
  Mat3d cov = Mat3d::Identity();
  double weight = 1.0;
};

// Full-covariance RGB mixture; weights positive and summing to 1, covariance
// eigenvalues at least 1e-6.
struct SurfaceGmm {
  std::vector<GmmComponent> components;
};

struct SceneParams {
  std::map<int, PatternParams> patterns;   // group id -> stats
  std::map<int, HomLine> plane_lines;      // surface id (>= 1) -> vanishing line
  std::map<int, SurfaceGmm> surface_gmms;  // surface id (0 = background) -> color model
  int num_groups = 0;                      // largest group id ever issued
  int num_surfaces = 0;                    // largest surface id ever issued
};

// One element of the joint move space. For keypoints it is the full label;
// for regions only group == 0 entries are takeable (the surface part).
struct CompositeLabel {
  int group = kNoGroup;
  int surface = kBackground;
  friend bool operator==(const CompositeLabel& a, const CompositeLabel& b) {
    return a.group == b.group && a.surface == b.surface;
  }
};

// Ordered label set for expansion moves, plus the cost-sharing classes:
// labels of one plane share its vanishing line, labels of one pattern share
// its statistics.
struct LabelUniverse {
  std::vector<CompositeLabel> labels;
  int num_groups = 0;
  int num_surfaces = 0;

  int size() const { return static_cast<int>(labels.size()); }
  std::vector<int> plane_class(int surface) const;  // indices of labels with that surface (>= 1)
  std::vector<int> pattern_class(int group) const;  // indices of labels with that group (>= 1)
  int index_of(const CompositeLabel& l) const;      // -1 when absent
};

// All (group, surface) pairs present in params, then the ungrouped plane
// labels, then background. Planes iterate in ascending id; proposal code
// issues ids in support order, so this is also the move schedule order.
LabelUniverse make_universe(const SceneParams& params);

struct RepeatGroup {
  int group = 0;
  int surface = 0;
  std::vector<int> members;  // keypoint indices, ascending
};

// Maximal sets of keypoints sharing (group, surface), group and surface both
// nonzero, ordered by (group, surface). Together with the singletons these
// partition the grouped keypoints.
std::vector<RepeatGroup> coplanar_repeat_groups(const JointLabeling& y);

// Connected components of same-surface regions under the adjacency graph.
// Components are ordered by smallest member; indices within ascend.
std::vector<std::vector<int>> connected_surface_components(
    const JointLabeling& y, const std::vector<std::array<int, 2>>& adjacency, int num_regions);

}  // namespace coprep
