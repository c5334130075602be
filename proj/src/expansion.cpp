#include "coprep/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coprep/error.hpp"
#include "coprep/maxflow.hpp"
#include "coprep/parallel.hpp"

namespace coprep {

double LabelingProblem::energy(const std::vector<int>& labeling) const {
  const int n = num_sites();
  if (static_cast<int>(labeling.size()) != n) throw Error("labeling size does not match problem");
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = labeling[i];
    if (l < 0 || l >= num_labels()) throw Error("label index out of range");
    const double u = unary(i, l);
    if (u >= kInfCost / 2) return kInfCost;
    e += u;
  }
  for (const PottsPair& p : pairs) {
    if (potts_key[labeling[p.a]] != potts_key[labeling[p.b]]) e += p.weight;
  }
  for (const LabelSubsetClass& c : classes) {
    bool used = false;
    for (int i = 0; i < n && !used; ++i) {
      used = std::binary_search(c.labels.begin(), c.labels.end(), labeling[i]);
    }
    if (used) e += c.cost;
  }
  return e;
}

namespace {

bool class_contains(const LabelSubsetClass& c, int label) {
  return std::binary_search(c.labels.begin(), c.labels.end(), label);
}

}  // namespace

// Binary variable x_i: 0 keeps the current label (source side), 1 switches to
// alpha (sink side). Pairwise tables fold into t-links plus one submodular
// arc; each subset class whose usage can change gets an auxiliary node wired
// with kInfCost arcs so the class cost is paid exactly when some member label
// is in use after the move.
std::optional<std::vector<int>> expansion_move(const LabelingProblem& problem, const std::vector<int>& current,
                                               int alpha) {
  const int n = problem.num_sites();
  if (alpha < 0 || alpha >= problem.num_labels()) throw Error("alpha out of range");
  if (static_cast<int>(current.size()) != n) throw Error("labeling size does not match problem");

  std::vector<char> can_take(n, 0);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (problem.unary(i, current[i]) >= kInfCost / 2) throw Error("expansion from infeasible labeling");
    can_take[i] = problem.feasible(i, alpha) ? 1 : 0;
    any = any || can_take[i];
  }
  if (!any) return std::nullopt;

  MaxFlow graph;
  graph.add_nodes(n);
  double const_term = 0.0;
  std::vector<double> e0(n), e1(n);
  for (int i = 0; i < n; ++i) {
    e0[i] = problem.unary(i, current[i]);
    e1[i] = can_take[i] ? problem.unary(i, alpha) : kInfCost;
  }

  const int key_alpha = problem.potts_key[alpha];
  for (const PottsPair& p : problem.pairs) {
    const int ka = problem.potts_key[current[p.a]];
    const int kb = problem.potts_key[current[p.b]];
    const double c00 = p.weight * (ka != kb);
    const double c01 = p.weight * (ka != key_alpha);
    const double c10 = p.weight * (key_alpha != kb);
    // c11 = 0: both sites on alpha agree.
    const_term += c00;
    e1[p.a] += c10 - c00;
    e1[p.b] += -c10;
    const double beta = c01 + c10 - c00;
    if (beta < -1e-9) throw Error("non-submodular pair in expansion");
    if (beta > 0) graph.add_edge(p.a, p.b, beta, 0.0);
  }

  for (const LabelSubsetClass& c : problem.classes) {
    if (c.cost <= 0 || c.labels.empty()) continue;
    std::vector<int> users;
    for (int i = 0; i < n; ++i) {
      if (class_contains(c, current[i])) users.push_back(i);
    }
    if (class_contains(c, alpha)) {
      if (!users.empty()) {
        const_term += c.cost;  // stays in use no matter the move
      } else {
        const int z = graph.add_node();
        graph.add_tweights(z, c.cost, 0.0);
        for (int i = 0; i < n; ++i) {
          if (can_take[i]) graph.add_edge(z, i, kInfCost, 0.0);
        }
      }
    } else if (!users.empty()) {
      const bool all_can_leave = std::all_of(users.begin(), users.end(), [&](int i) { return can_take[i] != 0; });
      if (!all_can_leave) {
        const_term += c.cost;  // some member is pinned, class cannot empty
      } else {
        const int z = graph.add_node();
        graph.add_tweights(z, 0.0, c.cost);
        for (int i : users) graph.add_edge(i, z, kInfCost, 0.0);
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const double m = std::min(e0[i], e1[i]);
    graph.add_tweights(i, e1[i] - m, e0[i] - m);
    const_term += m;
  }

  const double flow = graph.solve();
  std::vector<int> next(n);
  for (int i = 0; i < n; ++i) {
    const bool takes_alpha = !graph.source_side(i);
    if (takes_alpha && !can_take[i]) throw Error("cut crossed a forbidden arc");
    next[i] = takes_alpha ? alpha : current[i];
  }

  const double via_cut = flow + const_term;
  const double direct = problem.energy(next);
  const double tol = 1e-6 * std::max(1.0, std::abs(direct));
  if (std::abs(via_cut - direct) > tol) throw Error("move energy mismatch between cut and direct evaluation");
  return next;
}

SolveLabelingResult solve_labeling(const LabelingProblem& problem, const std::vector<int>& init,
                                   const ExpansionOptions& options) {
  SolveLabelingResult r;
  r.labeling = init;
  r.energy = problem.energy(init);
  if (r.energy >= kInfCost / 2) throw Error("initial labeling infeasible");

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double at_sweep_start = r.energy;
    for (int alpha = 0; alpha < problem.num_labels(); ++alpha) {
      auto moved = expansion_move(problem, r.labeling, alpha);
      if (!moved) continue;
      const double e = problem.energy(*moved);
      if (e < r.energy) {
        r.labeling = std::move(*moved);
        r.energy = e;
        ++r.moves_applied;
        r.move_energies.push_back(e);
      }
    }
    ++r.sweeps;
    if (at_sweep_start - r.energy <= options.min_decrease) break;
  }
  return r;
}

LabelingProblem build_labeling_problem(const SceneData& data, const SceneParams& params,
                                       const LabelUniverse& universe, const EnergyWeights& weights, int threads) {
  validate_weights(weights);
  const int nk = static_cast<int>(data.keypoints.size());
  const int nr = static_cast<int>(data.regions.size());
  const int nl = universe.size();
  if (nl == 0) throw Error("empty label universe");

  LabelingProblem problem;
  problem.unary.resize(nk + nr, nl);
  problem.potts_key.resize(nl);
  for (int l = 0; l < nl; ++l) problem.potts_key[l] = universe.labels[l].surface;

  parallel_for(nk, threads, [&](int i) {
    for (int l = 0; l < nl; ++l) {
      problem.unary(i, l) = keypoint_label_cost(data, i, universe.labels[l], params, weights);
    }
  });

  // Region scores per surface are shared by every label of that surface.
  std::map<int, std::vector<double>> surface_score;
  for (const auto& [v, gmm] : params.surface_gmms) {
    GmmScorer scorer(gmm);
    std::vector<double>& vals = surface_score[v];
    vals.resize(nr);
    parallel_for(nr, threads, [&](int j) { vals[j] = region_color_score(data.regions[j], scorer); });
  }
  for (int j = 0; j < nr; ++j) {
    for (int l = 0; l < nl; ++l) {
      const CompositeLabel& lab = universe.labels[l];
      if (lab.group != kNoGroup) {
        problem.unary(nk + j, l) = kInfCost;
        continue;
      }
      auto it = surface_score.find(lab.surface);
      problem.unary(nk + j, l) = it == surface_score.end() ? kInfCost : weights.w_color * it->second[j];
    }
  }

  const double lambda = resolved_lambda(data, weights);
  if (weights.w_kp_contrast > 0) {
    for (const auto& pr : data.keypoint_pairs) {
      const double d2 = (data.keypoints[pr[0]].descriptor - data.keypoints[pr[1]].descriptor).squaredNorm();
      const double w = weights.w_kp_contrast * std::exp(-d2 / weights.sigma2_sq);
      if (w > 0) problem.pairs.push_back({pr[0], pr[1], w});
    }
  }
  if (weights.w_rgn_contrast > 0) {
    for (const RegionEdge& e : data.region_edges) {
      const double w = weights.w_rgn_contrast * std::exp(-e.contrast * e.contrast / lambda);
      if (w > 0) problem.pairs.push_back({nk + e.a, nk + e.b, w});
    }
  }
  if (weights.w_overlap > 0) {
    for (const auto& ov : data.overlap_pairs) {
      problem.pairs.push_back({ov[0], nk + ov[1], weights.w_overlap});
    }
  }

  if (weights.subset_cost_plane > 0) {
    for (const auto& [v, line] : params.plane_lines) {
      (void)line;
      std::vector<int> members = universe.plane_class(v);
      if (!members.empty()) problem.classes.push_back({weights.subset_cost_plane, std::move(members)});
    }
  }
  if (weights.subset_cost_pattern > 0) {
    for (const auto& [g, pat] : params.patterns) {
      (void)pat;
      std::vector<int> members = universe.pattern_class(g);
      if (!members.empty()) problem.classes.push_back({weights.subset_cost_pattern, std::move(members)});
    }
  }
  return problem;
}

std::vector<int> encode_labeling(const JointLabeling& y, const LabelUniverse& universe) {
  std::vector<int> out;
  out.reserve(y.keypoints.size() + y.regions.size());
  for (const KeypointLabel& l : y.keypoints) {
    const int idx = universe.index_of({l.group(), l.surface()});
    if (idx < 0) throw Error("keypoint label missing from universe");
    out.push_back(idx);
  }
  for (const RegionLabel& l : y.regions) {
    const int idx = universe.index_of({kNoGroup, l.surface});
    if (idx < 0) throw Error("region label missing from universe");
    out.push_back(idx);
  }
  return out;
}

JointLabeling decode_labeling(const std::vector<int>& labels, const LabelUniverse& universe, int num_keypoints,
                              int num_regions) {
  if (static_cast<int>(labels.size()) != num_keypoints + num_regions) throw Error("encoded labeling size mismatch");
  JointLabeling y;
  y.keypoints.reserve(num_keypoints);
  y.regions.reserve(num_regions);
  for (int i = 0; i < num_keypoints; ++i) {
    const CompositeLabel& l = universe.labels.at(labels[i]);
    y.keypoints.emplace_back(l.group, l.surface);
  }
  for (int j = 0; j < num_regions; ++j) {
    const CompositeLabel& l = universe.labels.at(labels[num_keypoints + j]);
    if (l.group != kNoGroup) throw Error("region decoded to a grouped label");
    y.regions.push_back({l.surface});
  }
  return y;
}

}  // namespace coprep
