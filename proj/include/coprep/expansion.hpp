#pragma once

#include <optional>
#include <vector>

#include "coprep/energy.hpp"
#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

struct PottsPair {
  int a = 0;
  int b = 0;
  double weight = 0.0;  // paid when the two sites' label keys differ
};

// A set of labels sharing one model part; its cost is paid once when any
// site uses a label from the set.
struct LabelSubsetClass {
  double cost = 0.0;
  std::vector<int> labels;  // label indices, ascending
};

// Site-label assignment problem: dense unary costs (kInfCost marks an
// assignment a site may never take), Potts pairs over per-label keys, and
// label subset costs. Sites and labels are plain indices; the scene bridge
// below maps keypoints/regions and composite labels onto them.
struct LabelingProblem {
  MatXd unary;                // num_sites x num_labels
  std::vector<int> potts_key;  // per label
  std::vector<PottsPair> pairs;
  std::vector<LabelSubsetClass> classes;

  int num_sites() const { return static_cast<int>(unary.rows()); }
  int num_labels() const { return static_cast<int>(unary.cols()); }

  bool feasible(int site, int label) const { return unary(site, label) < kInfCost / 2; }

  // Direct evaluation; returns kInfCost when any site holds an infeasible
  // label. This is the value every move is checked against.
  double energy(const std::vector<int>& labeling) const;
};

// One alpha-expansion step: every site simultaneously keeps its label or
// switches to alpha, solved as a min cut with per-class auxiliary nodes for
// the subset costs. Returns the new labeling, which never has higher energy
// than `current`; nullopt when no site can take alpha. Throws Error if the
// cut value and the direct energy of the result disagree beyond 1e-6
// relative (both are always computed).
std::optional<std::vector<int>> expansion_move(const LabelingProblem& problem, const std::vector<int>& current,
                                               int alpha);

struct ExpansionOptions {
  int max_sweeps = 10;
  double min_decrease = 1e-9;  // sweep-over-sweep improvement to keep going
};

struct SolveLabelingResult {
  std::vector<int> labeling;
  double energy = 0.0;
  int moves_applied = 0;
  int sweeps = 0;
  std::vector<double> move_energies;  // energy after each accepted move
};

// Sweeps alpha over all labels in order, accepting only strict decreases,
// until a sweep improves by at most min_decrease or max_sweeps is reached.
SolveLabelingResult solve_labeling(const LabelingProblem& problem, const std::vector<int>& init,
                                   const ExpansionOptions& options = {});

// --- scene bridge ---------------------------------------------------------

// Sites are keypoints [0, nk) then regions [nk, nk+nr). Unaries come from
// keypoint_label_cost/region_label_cost, Potts keys are the surface part of
// each composite label, pairs carry the contrast and overlap weights, and
// classes mirror the universe's per-plane and per-pattern label sets.
LabelingProblem build_labeling_problem(const SceneData& data, const SceneParams& params,
                                       const LabelUniverse& universe, const EnergyWeights& weights,
                                       int threads = 1);

std::vector<int> encode_labeling(const JointLabeling& y, const LabelUniverse& universe);
JointLabeling decode_labeling(const std::vector<int>& labels, const LabelUniverse& universe, int num_keypoints,
                              int num_regions);

}  // namespace coprep
