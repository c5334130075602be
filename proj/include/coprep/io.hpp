#pragma once

#include <optional>
#include <string>

#include "coprep/energy.hpp"
#include "coprep/scene.hpp"
#include "coprep/scene_data.hpp"
#include "coprep/solver.hpp"

namespace coprep {

// Scene observations plus optional ground truth, as a versioned JSON file.
// Keypoint neighbor pairs are not stored; loading rebuilds them through
// finalize_scene, so a loaded scene is ready for energy evaluation.
struct SceneFile {
  SceneData data;
  std::optional<JointLabeling> gt_labeling;
  std::optional<SceneParams> gt_params;
};

SceneFile load_scene(const std::string& path);
void save_scene(const std::string& path, const SceneFile& scene);

// Solver output as a versioned JSON file. wall_seconds is only written when
// set, keeping default output byte-identical across reruns.
struct ResultFile {
  JointLabeling labeling;
  SceneParams params;
  double initial_energy = 0.0;
  double energy = 0.0;
  std::vector<IterationRecord> iterations;
  std::string termination;
  std::optional<double> wall_seconds;
};

ResultFile load_result(const std::string& path);
void save_result(const std::string& path, const ResultFile& result);

// Flat "name value" text format, one pair per line, # starts a comment.
// Unknown names are rejected; omitted names keep their defaults. lambda
// accepts a number or the word "auto".
EnergyWeights load_weights(const std::string& path);
void save_weights(const std::string& path, const EnergyWeights& weights);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace coprep
