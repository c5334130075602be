#include "coprep/scene_data.hpp"

#include <algorithm>
#include <set>

#include "coprep/error.hpp"

namespace coprep {

void finalize_scene(SceneData& data, int knn_k) {
  const int nk = static_cast<int>(data.keypoints.size());
  const int nr = static_cast<int>(data.regions.size());

  for (const Keypoint& k : data.keypoints) {
    if (static_cast<int>(k.descriptor.size()) != data.descriptor_dim) {
      throw DataFormatError("keypoint descriptor dimension mismatch");
    }
  }
  for (Region& r : data.regions) {
    if (r.pixel_count < 1) throw DataFormatError("region pixel_count must be positive");
    if (r.samples.empty()) throw DataFormatError("region has no color samples");
    if (static_cast<int>(r.samples.size()) > kMaxRegionSamples) r.samples.resize(kMaxRegionSamples);
  }

  std::set<std::array<int, 2>> edge_set;
  double sq_sum = 0.0;
  for (auto& e : data.region_edges) {
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.a < 0 || e.b >= nr || e.a == e.b) throw DataFormatError("region edge index out of range");
    if (!(e.contrast >= 0.0)) throw DataFormatError("region edge contrast must be nonnegative");
    if (!edge_set.insert({e.a, e.b}).second) throw DataFormatError("duplicate region edge");
    sq_sum += e.contrast * e.contrast;
  }
  data.mean_sq_contrast = data.region_edges.empty() ? 0.0 : sq_sum / static_cast<double>(data.region_edges.size());

  for (const auto& p : data.overlap_pairs) {
    if (p[0] < 0 || p[0] >= nk || p[1] < 0 || p[1] >= nr) throw DataFormatError("overlap pair index out of range");
  }

  // Symmetrized kNN in descriptor space: (i, j) is kept when either endpoint
  // lists the other among its k nearest.
  std::set<std::array<int, 2>> pair_set;
  for (int i = 0; i < nk; ++i) {
    std::vector<std::pair<double, int>> dist;
    dist.reserve(nk - 1);
    for (int j = 0; j < nk; ++j) {
      if (j == i) continue;
      dist.emplace_back((data.keypoints[i].descriptor - data.keypoints[j].descriptor).squaredNorm(), j);
    }
    const int kk = std::min<int>(knn_k, static_cast<int>(dist.size()));
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    for (int t = 0; t < kk; ++t) {
      const int j = dist[t].second;
      pair_set.insert({std::min(i, j), std::max(i, j)});
    }
  }
  data.keypoint_pairs.assign(pair_set.begin(), pair_set.end());
}

}  // namespace coprep
