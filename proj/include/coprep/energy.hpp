#pragma once

#include <optional>

#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

// Linear weights and scale constants of the labeling energy. All weights are
// nonnegative; sigma1_sq/sigma2_sq are positive; lambda empty means "derive
// from the scene as 2 * mean squared boundary contrast".
struct EnergyWeights {
  double w_scale = 1.0;
  double w_app = 1.0;
  double w_color = 1.0;
  double w_kp_contrast = 0.5;
  double w_rgn_contrast = 1.0;
  double w_overlap = 1.0;
  double w_singleton = 3.0;
  double w_planar_singleton = 1.0;
  double subset_cost_plane = 5.0;
  double subset_cost_pattern = 2.0;
  double sigma1_sq = 0.08;
  double sigma2_sq = 0.08;
  std::optional<double> lambda;  // empty = auto
};

// Throws Error when a constraint above is violated.
void validate_weights(const EnergyWeights& w);

double resolved_lambda(const SceneData& data, const EnergyWeights& w);

// Every feature below returns its unweighted sum; total_energy applies the
// weights. Features evaluate a realized labeling and throw (MissingPattern,
// MissingGmm, SideViolation) when the labeling references absent or
// inconsistent parameters.

// Sum over coplanar repeat groups of squared deviations of each member's log
// rectified scale from the group's stored mean log scale.
double scale_feature(const SceneData& data, const JointLabeling& y, const SceneParams& params);

// Sum over grouped keypoints of squared descriptor distance to the pattern
// mean, divided by sigma1_sq.
double appearance_feature(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                          const EnergyWeights& w);

// Sum over regions of the mean best-component negative log score of the
// region's color samples under its surface's mixture. Real-valued: tight
// mixtures can push individual scores below zero.
double color_feature(const SceneData& data, const JointLabeling& y, const SceneParams& params);

// Contrast-weighted Potts over keypoint neighbor pairs with different
// surfaces: exp(-||u_i - u_j||^2 / sigma2_sq).
double keypoint_contrast_feature(const SceneData& data, const JointLabeling& y, double sigma2_sq);

// Contrast-weighted Potts over adjacent region pairs with different
// surfaces: exp(-contrast^2 / lambda).
double region_contrast_feature(const SceneData& data, const JointLabeling& y, double lambda);

// Count of keypoint/region overlap pairs whose surfaces disagree.
double overlap_feature(const SceneData& data, const JointLabeling& y);

struct SingletonCounts {
  int singletons = 0;         // keypoints with group 0
  int planar_singletons = 0;  // of those, keypoints with surface != background
};
SingletonCounts singleton_counts(const JointLabeling& y);

// subset_cost_plane per distinct plane in use plus subset_cost_pattern per
// distinct pattern in use. Background has no class.
double label_subset_cost(const JointLabeling& y, const EnergyWeights& w);

// Weighted contribution of each term; the fields sum to total.
struct EnergyBreakdown {
  double scale = 0, appearance = 0, color = 0;
  double kp_contrast = 0, rgn_contrast = 0, overlap = 0;
  double singleton = 0, subset = 0;
  double total = 0;
};

EnergyBreakdown energy_breakdown(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                                 const EnergyWeights& w);

double total_energy(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                    const EnergyWeights& w);

// Precomputed evaluator for one mixture: best-component negative log score.
class GmmScorer {
 public:
  explicit GmmScorer(const SurfaceGmm& gmm);
  double operator()(const Vec3d& rgb) const;

 private:
  struct Comp {
    Mat3d inv_cov;
    Vec3d mean;
    double offset;  // -log w + 1.5 log(2 pi) + 0.5 log det cov
  };
  std::vector<Comp> comps_;
};

// Mean scorer value over the region's stored samples. Equals the region's
// full-pixel average score when samples are an unbiased subsample.
double region_color_score(const Region& region, const GmmScorer& scorer);

// True when every hard constraint the assignment costs encode holds: planar
// keypoints strictly on the positive side of their plane's line, grouped
// keypoints with realized pattern statistics, regions with a color model.
// On feasible labelings the assignment-cost route and the feature route
// evaluate to the same energy.
bool labeling_feasible(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                       const EnergyWeights& w);

// Candidate-assignment costs used to build labeling moves. Unlike the
// features these never throw: an assignment whose parameters are absent or
// whose side constraint fails costs kInfCost.
double keypoint_label_cost(const SceneData& data, int i, const CompositeLabel& label, const SceneParams& params,
                           const EnergyWeights& w);
double region_label_cost(const SceneData& data, int j, const CompositeLabel& label, const SceneParams& params,
                         const EnergyWeights& w);

}  // namespace coprep
