#include "coprep/scene.hpp"

#include <algorithm>
#include <queue>

namespace coprep {

std::vector<int> LabelUniverse::plane_class(int surface) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (labels[i].surface == surface && surface != kBackground) out.push_back(i);
  }
  return out;
}

std::vector<int> LabelUniverse::pattern_class(int group) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (labels[i].group == group && group != kNoGroup) out.push_back(i);
  }
  return out;
}

int LabelUniverse::index_of(const CompositeLabel& l) const {
  for (int i = 0; i < size(); ++i) {
    if (labels[i] == l) return i;
  }
  return -1;
}

LabelUniverse make_universe(const SceneParams& params) {
  LabelUniverse u;
  u.num_groups = params.num_groups;
  u.num_surfaces = params.num_surfaces;
  for (const auto& [v, line] : params.plane_lines) {
    (void)line;
    for (const auto& [g, pat] : params.patterns) {
      (void)pat;
      u.labels.push_back({g, v});
    }
  }
  for (const auto& [v, line] : params.plane_lines) {
    (void)line;
    u.labels.push_back({kNoGroup, v});
  }
  u.labels.push_back({kNoGroup, kBackground});
  return u;
}

std::vector<RepeatGroup> coplanar_repeat_groups(const JointLabeling& y) {
  std::map<std::pair<int, int>, std::vector<int>> buckets;
  for (int i = 0; i < static_cast<int>(y.keypoints.size()); ++i) {
    const KeypointLabel& l = y.keypoints[i];
    if (l.group() != kNoGroup && l.surface() != kBackground) {
      buckets[{l.group(), l.surface()}].push_back(i);
    }
  }
  std::vector<RepeatGroup> out;
  out.reserve(buckets.size());
  for (auto& [key, members] : buckets) {
    out.push_back({key.first, key.second, std::move(members)});
  }
  return out;
}

std::vector<std::vector<int>> connected_surface_components(
    const JointLabeling& y, const std::vector<std::array<int, 2>>& adjacency, int num_regions) {
  std::vector<std::vector<int>> nbr(num_regions);
  for (const auto& e : adjacency) {
    nbr[e[0]].push_back(e[1]);
    nbr[e[1]].push_back(e[0]);
  }
  std::vector<std::vector<int>> components;
  std::vector<char> seen(num_regions, 0);
  for (int r = 0; r < num_regions; ++r) {
    if (seen[r]) continue;
    std::vector<int> comp;
    std::queue<int> q;
    q.push(r);
    seen[r] = 1;
    while (!q.empty()) {
      const int cur = q.front();
      q.pop();
      comp.push_back(cur);
      for (int nb : nbr[cur]) {
        if (!seen[nb] && y.regions[nb] == y.regions[cur]) {
          seen[nb] = 1;
          q.push(nb);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

}  // namespace coprep
