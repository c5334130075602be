#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

struct ProposalConfig {
  double tau = 0.35;          // descriptor radius for leader clustering
  int min_cluster_size = 2;   // smaller clusters are discarded
  int rounds = 500;           // two-pair line samples
  double log_tol = 0.2;       // inlier band around the cluster median log scale
  int max_planes = 8;         // kept after non-maximum suppression
  double nms_angle_deg = 2.0;  // minimum angle between kept oriented lines
  int gmm_components = 5;
  int gmm_iters = 10;
  std::uint64_t seed = 1;
};

// Greedy leader clustering of unit descriptors: scanning in index order,
// each keypoint joins the first earlier leader within tau, otherwise founds
// a new cluster. Clusters below min_cluster_size are dropped; survivors are
// ordered by size (ties: earlier founder first), so position p holds the
// members of group id p + 1.
std::vector<std::vector<int>> cluster_descriptors(const SceneData& data, double tau, int min_cluster_size);

// Line from two same-cluster keypoint pairs. Each pair (a, b) constrains the
// line to be orthogonal to c_a - r c_b with r the cube root of the scale
// ratio, exact when the pair repeats a pattern on the plane of that line.
// Returns nullopt on degenerate input: coincident scaled centroids, near
// parallel constraints, or centroids that cannot all be oriented positive.
std::optional<HomLine> line_from_two_pairs(const SceneData& data, const std::array<int, 2>& pair_a,
                                           const std::array<int, 2>& pair_b);

// Support of a candidate line: per cluster, members on the positive side
// whose log rectified scale sits within log_tol of the cluster's feasible
// median; clusters with at least two such inliers add their count.
int verify_line(const SceneData& data, const HomLine& line, const std::vector<std::vector<int>>& clusters,
                double log_tol);

struct Proposal {
  SceneParams params;
  JointLabeling labeling;
};

// Full bootstrap: cluster descriptors, sample candidate lines from pair
// constraints, score them, keep a diverse high-support subset as planes,
// assign each cluster member to its best plane, and fit initial pattern and
// color statistics. Deterministic in config.seed. Scenes with fewer than
// four clustered keypoints yield the all-background proposal.
Proposal propose(const SceneData& data, const ProposalConfig& config);

}  // namespace coprep
