#include "coprep/solver.hpp"

#include <cmath>
#include <set>

#include "coprep/error.hpp"
#include "coprep/regression.hpp"

namespace coprep {

void prune_unused_params(const JointLabeling& y, SceneParams& params) {
  std::set<int> groups;
  std::set<int> surfaces;
  for (const KeypointLabel& l : y.keypoints) {
    if (l.group() != kNoGroup) groups.insert(l.group());
    if (l.surface() != kBackground) surfaces.insert(l.surface());
  }
  for (const RegionLabel& l : y.regions) {
    if (l.surface != kBackground) surfaces.insert(l.surface);
  }

  std::erase_if(params.patterns, [&](const auto& kv) { return !groups.count(kv.first); });
  std::erase_if(params.plane_lines, [&](const auto& kv) { return !surfaces.count(kv.first); });
  std::erase_if(params.surface_gmms,
                [&](const auto& kv) { return kv.first != kBackground && !surfaces.count(kv.first); });
  for (auto& [g, pat] : params.patterns) {
    (void)g;
    std::erase_if(pat.mean_log_rect_scale, [&](const auto& kv) { return !params.plane_lines.count(kv.first); });
  }
  params.num_groups = params.patterns.empty() ? 0 : params.patterns.rbegin()->first;
  params.num_surfaces = params.plane_lines.empty() ? 0 : params.plane_lines.rbegin()->first;
}

void complete_scale_means(const SceneData& data, const JointLabeling& y, SceneParams& params) {
  std::map<int, std::vector<int>> members;
  for (std::size_t i = 0; i < y.keypoints.size(); ++i) {
    if (y.keypoints[i].group() != kNoGroup) members[y.keypoints[i].group()].push_back(static_cast<int>(i));
  }
  for (auto& [g, pat] : params.patterns) {
    for (const auto& [v, line] : params.plane_lines) {
      if (pat.mean_log_rect_scale.count(v)) continue;
      const auto mean_over = [&](const std::vector<int>& idx) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (int i : idx) {
          if (!same_side(line, data.keypoints[i])) continue;
          sum += rectified_log_scale_direct(line.coords(), data.keypoints[i]);
          ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / n;
      };
      std::optional<double> mean;
      const auto mit = members.find(g);
      if (mit != members.end()) mean = mean_over(mit->second);
      if (!mean) {
        std::vector<int> all(data.keypoints.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        mean = mean_over(all);
      }
      if (mean) pat.mean_log_rect_scale.emplace(v, *mean);
    }
  }
}

SolveReport solve(const SceneData& data, const SolverConfig& config) {
  validate_weights(config.weights);
  const Rng base(config.proposal.seed);

  Proposal proposal = propose(data, config.proposal);
  SolveReport report;
  report.labeling = std::move(proposal.labeling);
  report.params = std::move(proposal.params);
  prune_unused_params(report.labeling, report.params);

  double energy = total_energy(data, report.labeling, report.params, config.weights);
  report.initial_energy = energy;
  report.termination = "iteration-limit";

  const auto check_monotone = [](double before, double after, const char* stage) {
    if (after > before + 1e-6 * std::max(1.0, std::abs(before))) {
      throw Error(std::string(stage) + " increased the energy");
    }
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    complete_scale_means(data, report.labeling, report.params);

    const LabelUniverse universe = make_universe(report.params);
    const LabelingProblem problem =
        build_labeling_problem(data, report.params, universe, config.weights, config.threads);
    const std::vector<int> enc = encode_labeling(report.labeling, universe);
    const SolveLabelingResult lab = solve_labeling(problem, enc, config.expansion);
    JointLabeling y2 = decode_labeling(lab.labeling, universe, static_cast<int>(data.keypoints.size()),
                                       static_cast<int>(data.regions.size()));

    const double e_lab = total_energy(data, y2, report.params, config.weights);
    if (std::abs(e_lab - lab.energy) > 1e-6 * std::max(1.0, std::abs(e_lab))) {
      throw Error("move-space energy and feature energy disagree");
    }
    check_monotone(energy, e_lab, "labeling step");

    Rng iter_rng = base.fork(40000 + static_cast<std::uint64_t>(iter));
    SceneParams p2 = regress_all(data, y2, report.params, config.weights, iter_rng);
    const double e_reg = total_energy(data, y2, p2, config.weights);
    check_monotone(e_lab, e_reg, "regression step");

    report.labeling = std::move(y2);
    report.params = std::move(p2);
    prune_unused_params(report.labeling, report.params);
    report.iterations.push_back({e_lab, e_reg, lab.moves_applied, lab.sweeps});

    const double rel = (energy - e_reg) / std::max(1.0, std::abs(energy));
    energy = e_reg;
    if (rel < config.rel_tol) {
      report.termination = "converged";
      break;
    }
  }
  report.energy = energy;
  return report;
}

}  // namespace coprep
