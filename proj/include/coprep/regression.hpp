#pragma once

#include <map>
#include <vector>

#include "coprep/energy.hpp"
#include "coprep/rng.hpp"
#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

// Scale dispersion of one plane's repeat groups as a function of the line:
// for each group, squared deviations of the members' log rectified scales
// from the group mean at that line (the per-group means are profiled out).
// Returns +inf when any member of any group lies on the wrong side.
double vline_objective(const Vec3d& line, const SceneData& data, const std::vector<std::vector<int>>& groups);

// Euclidean gradient of vline_objective. The objective is invariant along
// positive rays, so the gradient is automatically orthogonal to the line.
// Requires a feasible line.
Vec3d vline_gradient(const Vec3d& line, const SceneData& data, const std::vector<std::vector<int>>& groups);

struct LineRefineOptions {
  int barrier_rounds = 4;
  double barrier_mu = 1e-3;     // initial barrier strength
  double barrier_decay = 0.1;   // per-round multiplier
  int max_newton_iters = 30;    // per barrier round
  double grad_tol = 1e-10;
  double fd_step = 1e-5;        // chart step for the Hessian estimate
};

// Interior-point refinement of a vanishing line on the unit sphere: a few
// rounds of damped Newton steps in a two-parameter tangent chart against the
// objective plus a log barrier keeping every frame point of `constrained`
// keypoints strictly on the positive side. Returns the best feasible iterate
// by raw objective, or `init` unchanged when nothing beat it (in particular
// when init itself is infeasible).
HomLine refine_vanishing_line(const HomLine& init, const SceneData& data,
                              const std::vector<std::vector<int>>& groups, const std::vector<int>& constrained,
                              const LineRefineOptions& opts = {});

// Exact minimizers of the pattern terms for a fixed labeling: per group the
// descriptor mean over all members (pooled across planes), and per (group,
// surface) the mean of the members' log rectified scales under that
// surface's line. Only pairs realized by the labeling get entries; groups
// without members are absent from the result.
std::map<int, PatternParams> update_pattern_params(const SceneData& data, const JointLabeling& y,
                                                   const std::map<int, HomLine>& lines);

// Single wide component covering the RGB cube; the fallback when a surface
// has no color evidence at all.
SurfaceGmm default_surface_gmm();

// Hard-assignment mixture fit: k-means++ seeding, then alternating best-
// component assignment with exact weighted ML updates. Empty components are
// dropped; covariance eigenvalues are clamped to at least 1e-6. If an
// iteration fails to improve the objective (possible only through the
// clamp), the previous model is kept and fitting stops, so the recorded
// objective trace is nonincreasing. sample_weights, when given, scales each
// sample's contribution; objective_trace, when given, receives the objective
// after seeding and after every kept iteration.
SurfaceGmm fit_surface_gmm(const std::vector<Vec3d>& samples, int num_components, int iters, Rng& rng,
                           const std::vector<double>* sample_weights = nullptr,
                           std::vector<double>* objective_trace = nullptr);

// Continuous parameter update for a fixed labeling: refines each used
// plane's line, refits pattern statistics, and refits each used surface's
// color model on its member regions' samples (each region contributing unit
// total weight). Every sub-update is guarded to never increase its energy
// term, so total_energy(data, y, result, w) <= total_energy(data, y, params,
// w) up to floating-point noise. Parameters of unused groups, planes, and
// surfaces are carried over untouched.
SceneParams regress_all(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                        const EnergyWeights& weights, Rng& rng);

}  // namespace coprep
