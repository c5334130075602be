#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coprep/energy.hpp"
#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"

namespace coprep {

enum class Placement { Arbitrary, Periodic };
enum class Symmetry { None, Rotated, Reflected };

// One planted plane: a vertical strip of the image whose repeating frames
// live on the given slanted plane. Pattern k plants its frames with area
// template_area * (1 + 0.35 k) in rectified space, so instances of one
// pattern agree in rectified scale exactly before pixel noise.
struct PlaneSpec {
  Vec3d line = Vec3d(0, 0, 1);  // vanishing line; (0,0,1) is fronto-parallel
  int repeat_count = 8;          // planted frames, split across patterns
  double template_area = 60.0;   // rectified-space frame area of pattern 0
  Placement placement = Placement::Arbitrary;
  Symmetry symmetry = Symmetry::Rotated;
  int num_patterns = 1;
  std::vector<Vec3d> palette;  // surface colors; default palette when empty
};

struct SynthSpec {
  int width = 512;
  int height = 512;
  std::vector<PlaneSpec> planes;
  int background_keypoints = 0;
  double sigma_pos = 0.0;   // image-space noise per frame coordinate
  double sigma_desc = 0.0;  // expected norm of the descriptor perturbation
  int descriptor_dim = kDefaultDescriptorDim;
  int grid = 8;                  // regions form a grid x grid partition
  int samples_per_region = 16;
  std::vector<Vec3d> background_palette;
  double color_jitter = 0.02;
  std::uint64_t seed = 1;
};

struct SynthResult {
  SceneData data;
  JointLabeling gt_labeling;
  SceneParams gt_params;
};

// Renders a SynthSpec into observations plus the labeling and parameters
// that produced them. The image splits into one vertical strip per plane and
// a background strip; frames are planted in each plane's rectified space and
// mapped back, regions tile the image as a grid colored by the owning
// strip's palette. Deterministic in spec.seed. Throws SpecInfeasible when
// the request cannot be realized (line crossing its strip, no room to place
// the requested frames, invalid counts).
SynthResult generate(const SynthSpec& spec);

// Exact minimizer by enumeration over the label universe of `params`.
// Throws TooLarge when the feasible assignment count exceeds 1e7.
std::pair<JointLabeling, double> brute_force_labeling(const SceneData& data, const SceneParams& params,
                                                      const EnergyWeights& weights);

// Scale-dispersion minimizing line over a whole-sphere direction grid
// (resolution^2 cells), evaluating scales through the full rectification
// chain rather than the closed form. Throws Error when no grid direction is
// feasible for all group members.
HomLine grid_search_line(const SceneData& data, const std::vector<std::vector<int>>& groups, int resolution = 64);

}  // namespace coprep
