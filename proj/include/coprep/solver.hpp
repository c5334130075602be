#pragma once

#include <string>
#include <vector>

#include "coprep/expansion.hpp"
#include "coprep/proposals.hpp"

namespace coprep {

struct SolverConfig {
  EnergyWeights weights;
  ProposalConfig proposal;
  ExpansionOptions expansion;
  int max_iters = 20;
  double rel_tol = 1e-4;  // relative energy decrease that counts as progress
  int threads = 1;
};

struct IterationRecord {
  double energy_after_labeling = 0.0;
  double energy_after_regression = 0.0;
  int moves = 0;
  int sweeps = 0;
};

struct SolveReport {
  JointLabeling labeling;
  SceneParams params;
  double initial_energy = 0.0;
  double energy = 0.0;
  std::vector<IterationRecord> iterations;
  std::string termination;  // "converged" or "iteration-limit"
};

// Drops parameters nothing in the labeling references: patterns without
// members, planes without sites, color models of unused planes. The
// background color model always stays. Does not renumber ids and never
// changes the labeling's energy.
void prune_unused_params(const JointLabeling& y, SceneParams& params);

// Fills in missing per-(group, surface) scale means so every group label is
// takeable on every plane: a missing mean is the average log rectified scale
// of the group's members under that plane's line (falling back to all
// feasible keypoints when no member is on the right side). Only adds
// entries, so the energy of the current labeling is untouched.
void complete_scale_means(const SceneData& data, const JointLabeling& y, SceneParams& params);

// Block-coordinate descent: bootstrap a proposal, then alternate expansion
// moves over the labeling with continuous parameter regression until the
// relative energy decrease of a full round drops below rel_tol or max_iters
// rounds ran. The energy after every half-step is verified to be
// nonincreasing. Deterministic in config.proposal.seed.
SolveReport solve(const SceneData& data, const SolverConfig& config);

}  // namespace coprep
