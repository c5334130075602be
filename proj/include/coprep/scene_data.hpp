#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "coprep/geometry.hpp"
#include "coprep/types.hpp"

namespace coprep {

// Superpixel-like image region: geometry is summarized by its centroid and
// pixel count; appearance by at most a few hundred subsampled RGB values.
struct Region {
  Vec2d centroid = Vec2d::Zero();
  std::int64_t pixel_count = 1;
  std::vector<Vec3d> samples;  // RGB in [0,1], capped at kMaxRegionSamples
};

inline constexpr int kMaxRegionSamples = 256;

struct RegionEdge {
  int a = 0;
  int b = 0;           // a < b
  double contrast = 0;  // boundary contrast, nonnegative
};

// Immutable per-scene observations. Keypoint neighbor pairs are derived data
// (descriptor-space kNN), rebuilt deterministically by finalize_scene.
struct SceneData {
  std::vector<Keypoint> keypoints;
  std::vector<Region> regions;
  std::vector<std::array<int, 2>> keypoint_pairs;   // i < j, unique
  std::vector<RegionEdge> region_edges;             // a < b, unique
  std::vector<std::array<int, 2>> overlap_pairs;    // (keypoint, region)
  int descriptor_dim = kDefaultDescriptorDim;
  double mean_sq_contrast = 0.0;  // mean of contrast^2 over region_edges

  std::vector<std::array<int, 2>> region_adjacency() const {
    std::vector<std::array<int, 2>> out;
    out.reserve(region_edges.size());
    for (const auto& e : region_edges) out.push_back({e.a, e.b});
    return out;
  }
};

// Builds the symmetrized descriptor-space kNN pair list, caps region samples,
// computes the mean squared contrast, and validates all index ranges.
// Ties in neighbor distance break toward the lower index.
void finalize_scene(SceneData& data, int knn_k = 10);

}  // namespace coprep
