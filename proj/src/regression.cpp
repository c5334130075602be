#include "coprep/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "coprep/error.hpp"

namespace coprep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool strictly_positive_side(const Vec3d& line, const Keypoint& kp) {
  for (const HomPoint& p : kp.frame) {
    if (!(line.dot(p) > 0.0)) return false;
  }
  return true;
}

}  // namespace

double vline_objective(const Vec3d& line, const SceneData& data, const std::vector<std::vector<int>>& groups) {
  double f = 0.0;
  std::vector<double> zs;
  for (const std::vector<int>& g : groups) {
    if (g.empty()) continue;
    zs.clear();
    double sum = 0.0;
    for (int i : g) {
      const Keypoint& kp = data.keypoints[i];
      if (!strictly_positive_side(line, kp)) return kInf;
      const double z = rectified_log_scale_direct(line, kp);
      zs.push_back(z);
      sum += z;
    }
    const double mean = sum / static_cast<double>(zs.size());
    for (double z : zs) f += (z - mean) * (z - mean);
  }
  return f;
}

Vec3d vline_gradient(const Vec3d& line, const SceneData& data, const std::vector<std::vector<int>>& groups) {
  Vec3d grad = Vec3d::Zero();
  std::vector<double> zs;
  std::vector<Vec3d> gs;
  for (const std::vector<int>& g : groups) {
    if (g.empty()) continue;
    zs.clear();
    gs.clear();
    double sum = 0.0;
    for (int i : g) {
      const Keypoint& kp = data.keypoints[i];
      if (!strictly_positive_side(line, kp)) throw SideViolation("gradient requested at an infeasible line");
      const double z = rectified_log_scale_direct(line, kp);
      Vec3d gi = Vec3d::Zero();
      for (const HomPoint& p : kp.frame) gi -= p / line.dot(p);
      zs.push_back(z);
      gs.push_back(gi);
      sum += z;
    }
    const double mean = sum / static_cast<double>(zs.size());
    // The group-mean term drops out: deviations sum to zero.
    for (std::size_t k = 0; k < zs.size(); ++k) grad += 2.0 * (zs[k] - mean) * gs[k];
  }
  return grad;
}

namespace {

double barrier_value(const Vec3d& line, const SceneData& data, const std::vector<int>& constrained) {
  double b = 0.0;
  for (int i : constrained) {
    for (const HomPoint& p : data.keypoints[i].frame) {
      const double d = line.dot(p);
      if (!(d > 0.0)) return kInf;
      b -= std::log(d);
    }
  }
  return b;
}

Vec3d barrier_gradient(const Vec3d& line, const SceneData& data, const std::vector<int>& constrained) {
  Vec3d g = Vec3d::Zero();
  for (int i : constrained) {
    for (const HomPoint& p : data.keypoints[i].frame) g -= p / line.dot(p);
  }
  return g;
}

// Orthonormal basis of the plane orthogonal to unit vector l.
std::pair<Vec3d, Vec3d> tangent_basis(const Vec3d& l) {
  int smallest = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(l[k]) < std::abs(l[smallest])) smallest = k;
  }
  Vec3d axis = Vec3d::Zero();
  axis[smallest] = 1.0;
  const Vec3d b1 = l.cross(axis).normalized();
  const Vec3d b2 = l.cross(b1);
  return {b1, b2};
}

}  // namespace

HomLine refine_vanishing_line(const HomLine& init, const SceneData& data,
                              const std::vector<std::vector<int>>& groups, const std::vector<int>& constrained,
                              const LineRefineOptions& opts) {
  const double f0 = vline_objective(init.coords(), data, groups);
  if (!std::isfinite(f0) || !std::isfinite(barrier_value(init.coords(), data, constrained))) return init;

  Vec3d cur = init.coords();
  Vec3d best = cur;
  double best_f = f0;

  const auto merit = [&](const Vec3d& l, double mu) {
    const double f = vline_objective(l, data, groups);
    if (!std::isfinite(f)) return kInf;
    const double b = barrier_value(l, data, constrained);
    return std::isfinite(b) ? f + mu * b : kInf;
  };

  double mu = opts.barrier_mu;
  for (int round = 0; round < opts.barrier_rounds; ++round, mu *= opts.barrier_decay) {
    for (int iter = 0; iter < opts.max_newton_iters; ++iter) {
      const auto [b1, b2] = tangent_basis(cur);
      const auto chart_grad = [&](const Vec2d& t) -> Vec2d {
        const Vec3d l = (cur + t.x() * b1 + t.y() * b2).normalized();
        const Vec3d g3 = vline_gradient(l, data, groups) + mu * barrier_gradient(l, data, constrained);
        return {b1.dot(g3), b2.dot(g3)};
      };

      const Vec2d g = chart_grad(Vec2d::Zero());
      if (g.norm() < opts.grad_tol) break;

      Eigen::Matrix2d h;
      bool h_ok = true;
      const double hstep = opts.fd_step;
      for (int j = 0; j < 2 && h_ok; ++j) {
        Vec2d tp = Vec2d::Zero();
        Vec2d tm = Vec2d::Zero();
        tp[j] = hstep;
        tm[j] = -hstep;
        const Vec3d lp = (cur + tp.x() * b1 + tp.y() * b2).normalized();
        const Vec3d lm = (cur + tm.x() * b1 + tm.y() * b2).normalized();
        if (!std::isfinite(merit(lp, mu)) || !std::isfinite(merit(lm, mu))) {
          h_ok = false;
          break;
        }
        const Vec2d col = (chart_grad(tp) - chart_grad(tm)) / (2.0 * hstep);
        h.col(j) = col;
      }
      if (h_ok) {
        h = 0.5 * (h + h.transpose()).eval();
      } else {
        h = Eigen::Matrix2d::Identity();
      }

      const double cur_merit = merit(cur, mu);
      double damping = 1e-8 * std::max(1.0, h.cwiseAbs().maxCoeff());
      bool stepped = false;
      for (int attempt = 0; attempt < 25 && !stepped; ++attempt, damping *= 10.0) {
        const Eigen::Matrix2d hd = h + damping * Eigen::Matrix2d::Identity();
        const Vec2d d = hd.ldlt().solve(-g);
        if (!d.allFinite()) continue;
        const Vec3d trial = (cur + d.x() * b1 + d.y() * b2).normalized();
        if (merit(trial, mu) < cur_merit - 1e-15) {
          cur = trial;
          stepped = true;
          const double f = vline_objective(cur, data, groups);
          if (f < best_f) {
            best_f = f;
            best = cur;
          }
        }
      }
      if (!stepped) break;
    }
  }
  return best_f < f0 ? HomLine(best) : init;
}

std::map<int, PatternParams> update_pattern_params(const SceneData& data, const JointLabeling& y,
                                                   const std::map<int, HomLine>& lines) {
  std::map<int, PatternParams> out;
  std::map<int, int> counts;
  for (std::size_t i = 0; i < y.keypoints.size(); ++i) {
    const int g = y.keypoints[i].group();
    if (g == kNoGroup) continue;
    auto [it, fresh] = out.try_emplace(g);
    if (fresh) {
      it->second.mean_descriptor = VecXd::Zero(data.keypoints[i].descriptor.size());
    }
    it->second.mean_descriptor += data.keypoints[i].descriptor;
    ++counts[g];
  }
  for (auto& [g, pat] : out) pat.mean_descriptor /= static_cast<double>(counts.at(g));

  for (const RepeatGroup& grp : coplanar_repeat_groups(y)) {
    const auto lit = lines.find(grp.surface);
    if (lit == lines.end()) continue;
    double sum = 0.0;
    for (int i : grp.members) sum += rectified_log_scale_direct(lit->second.coords(), data.keypoints[i]);
    out.at(grp.group).mean_log_rect_scale[grp.surface] = sum / static_cast<double>(grp.members.size());
  }
  return out;
}

SurfaceGmm default_surface_gmm() {
  SurfaceGmm g;
  GmmComponent c;
  c.mean = Vec3d::Constant(0.5);
  c.cov = Mat3d::Identity() * 0.25;
  c.weight = 1.0;
  g.components.push_back(c);
  return g;
}

namespace {

Mat3d clamp_spd(const Mat3d& cov) {
  const Eigen::SelfAdjointEigenSolver<Mat3d> eig(0.5 * (cov + cov.transpose()));
  const Vec3d vals = eig.eigenvalues().cwiseMax(1e-6);
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

struct CompEval {
  Mat3d inv_cov;
  Vec3d mean;
  double offset;
};

std::vector<CompEval> component_evals(const SurfaceGmm& gmm) {
  std::vector<CompEval> evals;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (const GmmComponent& c : gmm.components) {
    const Eigen::LLT<Mat3d> llt(c.cov);
    const Mat3d l = llt.matrixL();
    const double log_det = 2.0 * std::log(l.diagonal().prod());
    evals.push_back({c.cov.inverse(), c.mean, -std::log(c.weight) + 1.5 * log2pi + 0.5 * log_det});
  }
  return evals;
}

double best_component_cost(const std::vector<CompEval>& evals, const Vec3d& x, int* which = nullptr) {
  double best = kInf;
  int arg = 0;
  for (int k = 0; k < static_cast<int>(evals.size()); ++k) {
    const Vec3d d = x - evals[k].mean;
    const double c = evals[k].offset + 0.5 * d.dot(evals[k].inv_cov * d);
    if (c < best) {
      best = c;
      arg = k;
    }
  }
  if (which) *which = arg;
  return best;
}

double hard_em_objective(const std::vector<CompEval>& evals, const std::vector<Vec3d>& samples,
                         const std::vector<double>& w) {
  double obj = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) obj += w[j] * best_component_cost(evals, samples[j]);
  return obj;
}

}  // namespace

SurfaceGmm fit_surface_gmm(const std::vector<Vec3d>& samples, int num_components, int iters, Rng& rng,
                           const std::vector<double>* sample_weights, std::vector<double>* objective_trace) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) return default_surface_gmm();
  std::vector<double> w(n, 1.0);
  if (sample_weights) {
    if (static_cast<int>(sample_weights->size()) != n) throw Error("sample weight count mismatch");
    w = *sample_weights;
    for (double v : w) {
      if (!(v > 0.0)) throw Error("sample weights must be positive");
    }
  }
  const int k = std::clamp(num_components, 1, n);

  // k-means++ seeding over weighted squared distances.
  std::vector<int> centers{static_cast<int>(rng.index(n))};
  std::vector<double> d2(n);
  for (int j = 0; j < n; ++j) d2[j] = (samples[j] - samples[centers[0]]).squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += w[j] * d2[j];
    int pick = -1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (int j = 0; j < n && pick < 0; ++j) {
        acc += w[j] * d2[j];
        if (acc > r) pick = j;
      }
    }
    if (pick < 0) pick = static_cast<int>(rng.index(n));
    centers.push_back(pick);
    for (int j = 0; j < n; ++j) d2[j] = std::min(d2[j], (samples[j] - samples[pick]).squaredNorm());
  }

  double mass = 0.0;
  Vec3d mu = Vec3d::Zero();
  for (int j = 0; j < n; ++j) {
    mass += w[j];
    mu += w[j] * samples[j];
  }
  mu /= mass;
  Mat3d pooled = Mat3d::Zero();
  for (int j = 0; j < n; ++j) pooled += w[j] * (samples[j] - mu) * (samples[j] - mu).transpose();
  pooled = clamp_spd(pooled / mass);

  SurfaceGmm model;
  for (int c : centers) model.components.push_back({samples[c], pooled, 1.0 / static_cast<double>(k)});
  std::vector<CompEval> evals = component_evals(model);
  double obj = hard_em_objective(evals, samples, w);
  if (objective_trace) objective_trace->push_back(obj);

  std::vector<int> assign(n);
  for (int it = 0; it < iters; ++it) {
    for (int j = 0; j < n; ++j) best_component_cost(evals, samples[j], &assign[j]);

    const int kc = static_cast<int>(model.components.size());
    std::vector<double> cmass(kc, 0.0);
    std::vector<Vec3d> cmean(kc, Vec3d::Zero());
    for (int j = 0; j < n; ++j) {
      cmass[assign[j]] += w[j];
      cmean[assign[j]] += w[j] * samples[j];
    }
    SurfaceGmm candidate;
    std::vector<int> remap(kc, -1);
    for (int c = 0; c < kc; ++c) {
      if (!(cmass[c] > 0.0)) continue;  // empty component drops out
      remap[c] = static_cast<int>(candidate.components.size());
      candidate.components.push_back({cmean[c] / cmass[c], Mat3d::Zero(), cmass[c] / mass});
    }
    for (int j = 0; j < n; ++j) {
      GmmComponent& comp = candidate.components[remap[assign[j]]];
      const Vec3d d = samples[j] - comp.mean;
      comp.cov += (w[j] / (comp.weight * mass)) * d * d.transpose();
    }
    for (GmmComponent& comp : candidate.components) comp.cov = clamp_spd(comp.cov);

    std::vector<CompEval> cand_evals = component_evals(candidate);
    const double cand_obj = hard_em_objective(cand_evals, samples, w);
    if (cand_obj <= obj) {
      model = std::move(candidate);
      evals = std::move(cand_evals);
      obj = cand_obj;
      if (objective_trace) objective_trace->push_back(obj);
    } else {
      break;  // only the eigenvalue clamp can push uphill; keep the better model
    }
  }
  return model;
}

SceneParams regress_all(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                        const EnergyWeights& weights, Rng& rng) {
  validate_weights(weights);
  SceneParams next = params;

  std::map<int, std::vector<std::vector<int>>> groups_by_plane;
  for (const RepeatGroup& grp : coplanar_repeat_groups(y)) groups_by_plane[grp.surface].push_back(grp.members);
  std::map<int, std::vector<int>> constrained_by_plane;
  for (std::size_t i = 0; i < y.keypoints.size(); ++i) {
    const int v = y.keypoints[i].surface();
    if (v != kBackground) constrained_by_plane[v].push_back(static_cast<int>(i));
  }

  std::map<int, HomLine> refined = params.plane_lines;
  for (const auto& [v, groups] : groups_by_plane) {
    const auto lit = params.plane_lines.find(v);
    if (lit == params.plane_lines.end()) continue;
    refined.insert_or_assign(v, refine_vanishing_line(lit->second, data, groups, constrained_by_plane.at(v)));
  }

  // Pattern stats refit under both line sets; the candidate with the lower
  // weighted scale-plus-appearance cost wins, so this stage cannot go uphill.
  const auto merged_patterns = [&](const std::map<int, PatternParams>& realized) {
    std::map<int, PatternParams> merged = params.patterns;
    for (const auto& [g, pat] : realized) merged.insert_or_assign(g, pat);
    return merged;
  };
  SceneParams cand_new = next;
  cand_new.plane_lines = refined;
  cand_new.patterns = merged_patterns(update_pattern_params(data, y, refined));
  SceneParams cand_old = next;
  cand_old.patterns = merged_patterns(update_pattern_params(data, y, params.plane_lines));

  const auto geometric_cost = [&](const SceneParams& p) {
    return weights.w_scale * scale_feature(data, y, p) + weights.w_app * appearance_feature(data, y, p, weights);
  };
  const SceneParams& geom_winner = geometric_cost(cand_new) <= geometric_cost(cand_old) ? cand_new : cand_old;
  next.plane_lines = geom_winner.plane_lines;
  next.patterns = geom_winner.patterns;

  // Color models: refit each used surface on its member regions' samples,
  // each region spreading unit weight over its samples so the fit objective
  // matches the region color score sum exactly. Adopt only non-worse fits.
  std::map<int, std::vector<int>> members_by_surface;
  for (std::size_t j = 0; j < y.regions.size(); ++j) {
    members_by_surface[y.regions[j].surface].push_back(static_cast<int>(j));
  }
  for (const auto& [v, members] : members_by_surface) {
    std::vector<Vec3d> samples;
    std::vector<double> wts;
    for (int j : members) {
      const Region& r = data.regions[j];
      for (const Vec3d& s : r.samples) {
        samples.push_back(s);
        wts.push_back(1.0 / static_cast<double>(r.samples.size()));
      }
    }
    if (samples.empty()) continue;
    Rng sub = rng.fork(7000 + static_cast<std::uint64_t>(v));
    const SurfaceGmm candidate =
        fit_surface_gmm(samples, 5, 10, sub, &wts, nullptr);

    const auto member_cost = [&](const SurfaceGmm& gmm) {
      const GmmScorer scorer(gmm);
      double c = 0.0;
      for (int j : members) c += region_color_score(data.regions[j], scorer);
      return c;
    };
    const auto git = next.surface_gmms.find(v);
    const double cur_cost = git == next.surface_gmms.end() ? kInf : member_cost(git->second);
    if (member_cost(candidate) <= cur_cost) next.surface_gmms.insert_or_assign(v, candidate);
  }
  return next;
}

}  // namespace coprep
