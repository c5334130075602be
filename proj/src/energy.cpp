#include "coprep/energy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "coprep/error.hpp"

namespace coprep {

void validate_weights(const EnergyWeights& w) {
  const auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(std::string(name) + " must be nonnegative");
  };
  nonneg(w.w_scale, "w_scale");
  nonneg(w.w_app, "w_app");
  nonneg(w.w_color, "w_color");
  nonneg(w.w_kp_contrast, "w_kp_contrast");
  nonneg(w.w_rgn_contrast, "w_rgn_contrast");
  nonneg(w.w_overlap, "w_overlap");
  nonneg(w.w_singleton, "w_singleton");
  nonneg(w.w_planar_singleton, "w_planar_singleton");
  nonneg(w.subset_cost_plane, "subset_cost_plane");
  nonneg(w.subset_cost_pattern, "subset_cost_pattern");
  if (!(w.sigma1_sq > 0.0)) throw Error("sigma1_sq must be positive");
  if (!(w.sigma2_sq > 0.0)) throw Error("sigma2_sq must be positive");
  if (w.lambda && !(*w.lambda > 0.0)) throw Error("lambda must be positive when given");
}

double resolved_lambda(const SceneData& data, const EnergyWeights& w) {
  if (w.lambda) return *w.lambda;
  const double auto_lambda = 2.0 * data.mean_sq_contrast;
  return auto_lambda > 0.0 ? auto_lambda : 1.0;
}

namespace {

const HomLine& line_for(const SceneParams& params, int surface) {
  const auto it = params.plane_lines.find(surface);
  if (it == params.plane_lines.end()) throw MissingPattern("no vanishing line for surface " + std::to_string(surface));
  return it->second;
}

const PatternParams& pattern_for(const SceneParams& params, int group) {
  const auto it = params.patterns.find(group);
  if (it == params.patterns.end()) throw MissingPattern("no statistics for pattern " + std::to_string(group));
  return it->second;
}

}  // namespace

double scale_feature(const SceneData& data, const JointLabeling& y, const SceneParams& params) {
  double sum = 0.0;
  for (const RepeatGroup& grp : coplanar_repeat_groups(y)) {
    const HomLine& line = line_for(params, grp.surface);
    const PatternParams& pat = pattern_for(params, grp.group);
    const auto mean_it = pat.mean_log_rect_scale.find(grp.surface);
    if (mean_it == pat.mean_log_rect_scale.end()) {
      throw MissingPattern("pattern " + std::to_string(grp.group) + " has no scale mean on surface " +
                           std::to_string(grp.surface));
    }
    for (int i : grp.members) {
      const double z = rectified_log_scale(line, data.keypoints[i]);
      const double d = z - mean_it->second;
      sum += d * d;
    }
  }
  return sum;
}

double appearance_feature(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                          const EnergyWeights& w) {
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(y.keypoints.size()); ++i) {
    const int g = y.keypoints[i].group();
    if (g == kNoGroup) continue;
    const PatternParams& pat = pattern_for(params, g);
    sum += (data.keypoints[i].descriptor - pat.mean_descriptor).squaredNorm() / w.sigma1_sq;
  }
  return sum;
}

double color_feature(const SceneData& data, const JointLabeling& y, const SceneParams& params) {
  std::map<int, GmmScorer> scorers;
  double sum = 0.0;
  for (int j = 0; j < static_cast<int>(y.regions.size()); ++j) {
    const int v = y.regions[j].surface;
    auto it = scorers.find(v);
    if (it == scorers.end()) {
      const auto git = params.surface_gmms.find(v);
      if (git == params.surface_gmms.end()) throw MissingGmm("no color model for surface " + std::to_string(v));
      it = scorers.emplace(v, GmmScorer(git->second)).first;
    }
    sum += region_color_score(data.regions[j], it->second);
  }
  return sum;
}

double keypoint_contrast_feature(const SceneData& data, const JointLabeling& y, double sigma2_sq) {
  double sum = 0.0;
  for (const auto& p : data.keypoint_pairs) {
    if (y.keypoints[p[0]].surface() == y.keypoints[p[1]].surface()) continue;
    const double d2 = (data.keypoints[p[0]].descriptor - data.keypoints[p[1]].descriptor).squaredNorm();
    sum += std::exp(-d2 / sigma2_sq);
  }
  return sum;
}

double region_contrast_feature(const SceneData& data, const JointLabeling& y, double lambda) {
  double sum = 0.0;
  for (const RegionEdge& e : data.region_edges) {
    if (y.regions[e.a].surface == y.regions[e.b].surface) continue;
    sum += std::exp(-(e.contrast * e.contrast) / lambda);
  }
  return sum;
}

double overlap_feature(const SceneData& data, const JointLabeling& y) {
  double sum = 0.0;
  for (const auto& p : data.overlap_pairs) {
    if (y.keypoints[p[0]].surface() != y.regions[p[1]].surface) sum += 1.0;
  }
  return sum;
}

SingletonCounts singleton_counts(const JointLabeling& y) {
  SingletonCounts c;
  for (const KeypointLabel& l : y.keypoints) {
    if (l.group() == kNoGroup) {
      ++c.singletons;
      if (l.surface() != kBackground) ++c.planar_singletons;
    }
  }
  return c;
}

double label_subset_cost(const JointLabeling& y, const EnergyWeights& w) {
  std::set<int> planes;
  std::set<int> patterns;
  for (const KeypointLabel& l : y.keypoints) {
    if (l.surface() != kBackground) planes.insert(l.surface());
    if (l.group() != kNoGroup) patterns.insert(l.group());
  }
  for (const RegionLabel& l : y.regions) {
    if (l.surface != kBackground) planes.insert(l.surface);
  }
  return w.subset_cost_plane * static_cast<double>(planes.size()) +
         w.subset_cost_pattern * static_cast<double>(patterns.size());
}

EnergyBreakdown energy_breakdown(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                                 const EnergyWeights& w) {
  EnergyBreakdown b;
  b.scale = w.w_scale * scale_feature(data, y, params);
  b.appearance = w.w_app * appearance_feature(data, y, params, w);
  b.color = w.w_color * color_feature(data, y, params);
  b.kp_contrast = w.w_kp_contrast * keypoint_contrast_feature(data, y, w.sigma2_sq);
  b.rgn_contrast = w.w_rgn_contrast * region_contrast_feature(data, y, resolved_lambda(data, w));
  b.overlap = w.w_overlap * overlap_feature(data, y);
  const SingletonCounts c = singleton_counts(y);
  b.singleton = w.w_singleton * c.singletons + w.w_planar_singleton * c.planar_singletons;
  b.subset = label_subset_cost(y, w);
  b.total = b.scale + b.appearance + b.color + b.kp_contrast + b.rgn_contrast + b.overlap + b.singleton + b.subset;
  return b;
}

double total_energy(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                    const EnergyWeights& w) {
  return energy_breakdown(data, y, params, w).total;
}

GmmScorer::GmmScorer(const SurfaceGmm& gmm) {
  if (gmm.components.empty()) throw Error("mixture has no components");
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (const GmmComponent& c : gmm.components) {
    if (!(c.weight > 0.0)) throw Error("mixture component weight must be positive");
    const Eigen::LLT<Mat3d> llt(c.cov);
    if (llt.info() != Eigen::Success) throw Error("mixture covariance is not positive definite");
    const Mat3d l = llt.matrixL();
    const double log_det = 2.0 * std::log(l.diagonal().prod());
    comps_.push_back({c.cov.inverse(), c.mean, -std::log(c.weight) + 1.5 * log2pi + 0.5 * log_det});
  }
}

double GmmScorer::operator()(const Vec3d& rgb) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Comp& c : comps_) {
    const Vec3d d = rgb - c.mean;
    const double score = c.offset + 0.5 * d.dot(c.inv_cov * d);
    if (score < best) best = score;
  }
  return best;
}

double region_color_score(const Region& region, const GmmScorer& scorer) {
  double sum = 0.0;
  for (const Vec3d& rgb : region.samples) sum += scorer(rgb);
  return sum / static_cast<double>(region.samples.size());
}

bool labeling_feasible(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                       const EnergyWeights& w) {
  for (int i = 0; i < static_cast<int>(y.keypoints.size()); ++i) {
    const CompositeLabel l{y.keypoints[i].group(), y.keypoints[i].surface()};
    if (keypoint_label_cost(data, i, l, params, w) >= kInfCost / 2) return false;
  }
  for (int j = 0; j < static_cast<int>(y.regions.size()); ++j) {
    if (region_label_cost(data, j, {kNoGroup, y.regions[j].surface}, params, w) >= kInfCost / 2) return false;
  }
  return true;
}

double keypoint_label_cost(const SceneData& data, int i, const CompositeLabel& label, const SceneParams& params,
                           const EnergyWeights& w) {
  const Keypoint& kp = data.keypoints[i];
  const HomLine* line = nullptr;
  if (label.surface != kBackground) {
    const auto it = params.plane_lines.find(label.surface);
    if (it == params.plane_lines.end()) return kInfCost;
    line = &it->second;
    if (!same_side(*line, kp)) return kInfCost;
  }
  if (label.group == kNoGroup) {
    double cost = w.w_singleton;
    if (label.surface != kBackground) cost += w.w_planar_singleton;
    return cost;
  }
  if (label.surface == kBackground) return kInfCost;  // untypeable pairing
  const auto pit = params.patterns.find(label.group);
  if (pit == params.patterns.end()) return kInfCost;
  const PatternParams& pat = pit->second;
  if (pat.mean_descriptor.size() != kp.descriptor.size()) return kInfCost;
  double cost = w.w_app * (kp.descriptor - pat.mean_descriptor).squaredNorm() / w.sigma1_sq;
  const auto mit = pat.mean_log_rect_scale.find(label.surface);
  if (mit == pat.mean_log_rect_scale.end()) return kInfCost;
  const double z = rectified_log_scale_direct(line->coords(), kp);
  const double d = z - mit->second;
  cost += w.w_scale * d * d;
  return cost;
}

double region_label_cost(const SceneData& data, int j, const CompositeLabel& label, const SceneParams& params,
                         const EnergyWeights& w) {
  if (label.group != kNoGroup) return kInfCost;
  const auto git = params.surface_gmms.find(label.surface);
  if (git == params.surface_gmms.end()) return kInfCost;
  return w.w_color * region_color_score(data.regions[j], GmmScorer(git->second));
}

}  // namespace coprep
