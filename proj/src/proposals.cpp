#include "coprep/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "coprep/error.hpp"
#include "coprep/regression.hpp"
#include "coprep/rng.hpp"

namespace coprep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Feasible members' log rectified scales; infeasible members get +inf.
std::vector<double> member_log_scales(const SceneData& data, const HomLine& line, const std::vector<int>& members) {
  std::vector<double> zs(members.size(), kInf);
  for (std::size_t m = 0; m < members.size(); ++m) {
    const Keypoint& kp = data.keypoints[members[m]];
    if (same_side(line, kp)) zs[m] = rectified_log_scale_direct(line.coords(), kp);
  }
  return zs;
}

}  // namespace

std::vector<std::vector<int>> cluster_descriptors(const SceneData& data, double tau, int min_cluster_size) {
  std::vector<int> leaders;
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < static_cast<int>(data.keypoints.size()); ++i) {
    int home = -1;
    for (std::size_t c = 0; c < leaders.size() && home < 0; ++c) {
      if ((data.keypoints[i].descriptor - data.keypoints[leaders[c]].descriptor).norm() <= tau) {
        home = static_cast<int>(c);
      }
    }
    if (home < 0) {
      leaders.push_back(i);
      clusters.push_back({i});
    } else {
      clusters[home].push_back(i);
    }
  }

  std::vector<int> order;
  for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
    if (static_cast<int>(clusters[c].size()) >= min_cluster_size) order.push_back(c);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return clusters[a].size() > clusters[b].size(); });
  std::vector<std::vector<int>> out;
  out.reserve(order.size());
  for (int c : order) out.push_back(std::move(clusters[c]));
  return out;
}

std::optional<HomLine> line_from_two_pairs(const SceneData& data, const std::array<int, 2>& pair_a,
                                           const std::array<int, 2>& pair_b) {
  const auto constraint = [&](const std::array<int, 2>& pr) -> std::optional<Vec3d> {
    const Keypoint& ka = data.keypoints[pr[0]];
    const Keypoint& kb = data.keypoints[pr[1]];
    const double r = std::cbrt(keypoint_scale(ka) / keypoint_scale(kb));
    const Vec3d d = keypoint_centroid(ka) - r * keypoint_centroid(kb);
    if (d.norm() <= 1e-10 * std::max(1.0, keypoint_centroid(ka).norm())) return std::nullopt;
    return d;
  };
  const auto d1 = constraint(pair_a);
  const auto d2 = constraint(pair_b);
  if (!d1 || !d2) return std::nullopt;
  const Vec3d cross = d1->cross(*d2);
  if (cross.norm() <= 1e-10 * d1->norm() * d2->norm()) return std::nullopt;

  Vec3d l = cross.normalized();
  int positive = 0;
  int negative = 0;
  for (int idx : {pair_a[0], pair_a[1], pair_b[0], pair_b[1]}) {
    const double side = l.dot(keypoint_centroid(data.keypoints[idx]));
    if (side > 0) {
      ++positive;
    } else if (side < 0) {
      ++negative;
    }
  }
  if (positive == 4) return HomLine(l);
  if (negative == 4) return HomLine(-l);
  return std::nullopt;
}

int verify_line(const SceneData& data, const HomLine& line, const std::vector<std::vector<int>>& clusters,
                double log_tol) {
  int support = 0;
  for (const std::vector<int>& members : clusters) {
    const std::vector<double> zs = member_log_scales(data, line, members);
    std::vector<double> feasible;
    for (double z : zs) {
      if (std::isfinite(z)) feasible.push_back(z);
    }
    if (feasible.size() < 2) continue;
    const double med = median_of(feasible);
    int inliers = 0;
    for (double z : feasible) {
      if (std::abs(z - med) <= log_tol) ++inliers;
    }
    if (inliers >= 2) support += inliers;
  }
  return support;
}

namespace {

SurfaceGmm gmm_from_regions(const SceneData& data, const ProposalConfig& cfg, Rng rng) {
  std::vector<Vec3d> samples;
  std::vector<double> wts;
  for (const Region& r : data.regions) {
    for (const Vec3d& s : r.samples) {
      samples.push_back(s);
      wts.push_back(1.0 / static_cast<double>(r.samples.size()));
    }
  }
  if (samples.empty()) return default_surface_gmm();
  return fit_surface_gmm(samples, cfg.gmm_components, cfg.gmm_iters, rng, &wts);
}

Proposal all_background(const SceneData& data, const ProposalConfig& cfg, const Rng& root) {
  Proposal p;
  p.labeling.keypoints.assign(data.keypoints.size(), KeypointLabel{});
  p.labeling.regions.assign(data.regions.size(), RegionLabel{});
  p.params.surface_gmms.emplace(kBackground, gmm_from_regions(data, cfg, root.fork(200)));
  return p;
}

}  // namespace

Proposal propose(const SceneData& data, const ProposalConfig& config) {
  const Rng root(config.seed);
  const std::vector<std::vector<int>> clusters = cluster_descriptors(data, config.tau, config.min_cluster_size);
  std::size_t eligible = 0;
  for (const auto& c : clusters) eligible += c.size();
  if (eligible < 4) return all_background(data, config, root);

  // Candidate lines cluster by cluster: both constraint pairs come from one
  // cluster, because pairs from different clusters may sit on different
  // planes and then constrain different lines. Each cluster keeps its best
  // sample by own-member support, polished on its inlier set; the polished
  // winners then compete on support over all clusters.
  Rng sampler = root.fork(101);
  std::vector<std::pair<HomLine, int>> candidates;
  const int per_cluster = std::max(16, config.rounds / std::max<int>(1, static_cast<int>(clusters.size())));
  for (const std::vector<int>& members : clusters) {
    if (members.size() < 4) continue;
    const auto draw_pair = [&]() -> std::array<int, 2> {
      const std::size_t n = members.size();
      const std::size_t a = sampler.index(n);
      std::size_t b = sampler.index(n - 1);
      if (b >= a) ++b;
      return {members[a], members[b]};
    };
    const auto local_support = [&](const HomLine& line) {
      const std::vector<double> zs = member_log_scales(data, line, members);
      std::vector<double> feasible;
      for (double z : zs) {
        if (std::isfinite(z)) feasible.push_back(z);
      }
      if (feasible.size() < 2) return 0;
      const double med = median_of(feasible);
      int inliers = 0;
      for (double z : feasible) {
        if (std::abs(z - med) <= config.log_tol) ++inliers;
      }
      return inliers;
    };

    std::optional<HomLine> best;
    int best_support = 1;  // a candidate must beat a lone inlier
    for (int round = 0; round < per_cluster; ++round) {
      const std::array<int, 2> pair_a = draw_pair();
      const std::array<int, 2> pair_b = draw_pair();
      const auto line = line_from_two_pairs(data, pair_a, pair_b);
      if (!line) continue;
      const int support = local_support(*line);
      if (support > best_support) {
        best_support = support;
        best = *line;
      }
    }
    if (!best) continue;

    // Polish on this cluster's inliers; a raw two-pair line carries the full
    // sampling noise.
    const std::vector<double> zs = member_log_scales(data, *best, members);
    std::vector<double> feasible;
    for (double z : zs) {
      if (std::isfinite(z)) feasible.push_back(z);
    }
    const double med = median_of(feasible);
    std::vector<int> inliers;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (std::isfinite(zs[m]) && std::abs(zs[m] - med) <= config.log_tol) inliers.push_back(members[m]);
    }
    HomLine line = *best;
    if (inliers.size() >= 2) line = refine_vanishing_line(line, data, {inliers}, inliers);
    candidates.emplace_back(line, verify_line(data, line, clusters, config.log_tol));
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  // Suppression compares horizon orientations, the angle between the lines'
  // image normals (a, b). On the unit line sphere every realistic vanishing
  // line crowds within a fraction of a degree of the pole, so the sphere
  // angle cannot tell distinct planes apart.
  const double min_angle = config.nms_angle_deg * std::numbers::pi / 180.0;
  const auto duplicate = [&](const HomLine& x, const HomLine& y) {
    Vec3d lx = x.coords();
    if (lx.z() < 0) lx = -lx;
    Vec3d ly = y.coords();
    if (ly.z() < 0) ly = -ly;
    const Vec2d dx = lx.head<2>(), dy = ly.head<2>();
    const double nx = dx.norm(), ny = dy.norm();
    if (nx < 1e-9 || ny < 1e-9) return nx < 1e-9 && ny < 1e-9;  // fronto lines pool
    const double c = std::clamp(dx.dot(dy) / (nx * ny), -1.0, 1.0);
    return std::acos(c) < min_angle;
  };

  std::vector<HomLine> planes;
  for (const auto& [line, support] : candidates) {
    if (static_cast<int>(planes.size()) >= config.max_planes) break;
    bool distinct = true;
    for (const HomLine& kept : planes) {
      if (duplicate(kept, line)) {
        distinct = false;
        break;
      }
    }
    if (distinct) planes.push_back(line);
  }
  if (planes.empty()) return all_background(data, config, root);

  Proposal p;
  for (int v = 0; v < static_cast<int>(planes.size()); ++v) p.params.plane_lines.emplace(v + 1, planes[v]);
  p.params.num_surfaces = static_cast<int>(planes.size());
  p.params.num_groups = static_cast<int>(clusters.size());

  // Each cluster member goes to the plane whose cluster median its log
  // rectified scale matches best, within the inlier band; the rest stay
  // background.
  p.labeling.keypoints.assign(data.keypoints.size(), KeypointLabel{});
  p.labeling.regions.assign(data.regions.size(), RegionLabel{});
  for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
    const std::vector<int>& members = clusters[c];
    std::vector<std::vector<double>> zs_per_plane;
    std::vector<double> medians(planes.size(), kInf);
    for (std::size_t v = 0; v < planes.size(); ++v) {
      zs_per_plane.push_back(member_log_scales(data, planes[v], members));
      std::vector<double> feasible;
      for (double z : zs_per_plane[v]) {
        if (std::isfinite(z)) feasible.push_back(z);
      }
      if (feasible.size() >= 2) medians[v] = median_of(feasible);
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      double best_dev = kInf;
      int best_v = 0;
      for (std::size_t v = 0; v < planes.size(); ++v) {
        if (!std::isfinite(medians[v]) || !std::isfinite(zs_per_plane[v][m])) continue;
        const double dev = std::abs(zs_per_plane[v][m] - medians[v]);
        if (dev <= config.log_tol && dev < best_dev) {
          best_dev = dev;
          best_v = static_cast<int>(v) + 1;
        }
      }
      if (best_v > 0) p.labeling.keypoints[members[m]] = KeypointLabel(c + 1, best_v);
    }
  }

  // Pattern statistics from the realized assignment; clusters whose members
  // all stayed background still carry their descriptor mean so a later move
  // can pick the group up.
  p.params.patterns = update_pattern_params(data, p.labeling, p.params.plane_lines);
  for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
    const int g = c + 1;
    if (p.params.patterns.count(g)) continue;
    VecXd mean = VecXd::Zero(data.descriptor_dim);
    for (int i : clusters[c]) mean += data.keypoints[i].descriptor;
    PatternParams pat;
    pat.mean_descriptor = mean / static_cast<double>(clusters[c].size());
    p.params.patterns.emplace(g, std::move(pat));
  }

  // Color models: planes from their member keypoints' patch colors when
  // available, otherwise from all region samples; background from all
  // region samples.
  for (int v = 1; v <= static_cast<int>(planes.size()); ++v) {
    std::vector<Vec3d> colors;
    for (std::size_t i = 0; i < p.labeling.keypoints.size(); ++i) {
      if (p.labeling.keypoints[i].surface() == v && data.keypoints[i].color) {
        colors.push_back(*data.keypoints[i].color);
      }
    }
    Rng sub = root.fork(200 + static_cast<std::uint64_t>(v));
    if (colors.empty()) {
      p.params.surface_gmms.emplace(v, gmm_from_regions(data, config, sub));
    } else {
      p.params.surface_gmms.emplace(v, fit_surface_gmm(colors, config.gmm_components, config.gmm_iters, sub));
    }
  }
  p.params.surface_gmms.emplace(kBackground, gmm_from_regions(data, config, root.fork(200)));
  return p;
}

}  // namespace coprep
