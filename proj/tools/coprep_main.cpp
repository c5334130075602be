#include <chrono>
#include <cmath>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "coprep/eval.hpp"
#include "coprep/io.hpp"
#include "coprep/solver.hpp"
#include "coprep/svg.hpp"
#include "coprep/synth.hpp"
#include "json.hpp"

namespace {

struct SynthArgs {
  std::string out;
  int planes = 2;
  int repeat = 12;
  int patterns = 2;
  double pos_noise = 0.5;
  double desc_noise = 0.05;
  int grid = 8;
  int bg_keypoints = 0;
  bool periodic = false;
  std::string symmetry = "rotated";
  int width = 512;
  int height = 512;
  double slant = 0.0008;
  std::uint64_t seed = 1;
  bool no_gt = false;
};

coprep::SynthSpec build_spec(const SynthArgs& a) {
  coprep::SynthSpec spec;
  spec.width = a.width;
  spec.height = a.height;
  spec.sigma_pos = a.pos_noise;
  spec.sigma_desc = a.desc_noise;
  spec.grid = a.grid;
  spec.background_keypoints = a.bg_keypoints;
  spec.seed = a.seed;
  coprep::Symmetry sym = coprep::Symmetry::Rotated;
  if (a.symmetry == "none") sym = coprep::Symmetry::None;
  if (a.symmetry == "reflected") sym = coprep::Symmetry::Reflected;
  for (int p = 0; p < a.planes; ++p) {
    coprep::PlaneSpec pl;
    const double theta = 2.399963229728653 * p;  // spread tilt directions
    pl.line = coprep::Vec3d(a.slant * std::cos(theta), a.slant * std::sin(theta), 1.0);
    pl.repeat_count = a.repeat;
    pl.num_patterns = a.patterns;
    pl.placement = a.periodic ? coprep::Placement::Periodic : coprep::Placement::Arbitrary;
    pl.symmetry = sym;
    spec.planes.push_back(std::move(pl));
  }
  return spec;
}

void add_proposal_flags(CLI::App* cmd, coprep::ProposalConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--tau", cfg.tau, "descriptor clustering radius");
  cmd->add_option("--rounds", cfg.rounds, "line sampling rounds");
  cmd->add_option("--log-tol", cfg.log_tol, "inlier band in log scale");
  cmd->add_option("--max-planes", cfg.max_planes, "plane cap after suppression");
}

std::vector<coprep::AnnotatedPlane> annotations_from_gt(const coprep::SceneFile& scene) {
  if (!scene.gt_labeling || !scene.gt_params) {
    throw coprep::DataFormatError("scene carries no ground truth to evaluate against");
  }
  std::vector<coprep::AnnotatedPlane> annotated;
  for (const auto& [v, line] : scene.gt_params->plane_lines) {
    coprep::AnnotatedPlane plane{line, {}};
    for (int i = 0; i < static_cast<int>(scene.gt_labeling->keypoints.size()); ++i) {
      if (scene.gt_labeling->keypoints[i].surface() == v) plane.keypoints.push_back(i);
    }
    if (!plane.keypoints.empty()) annotated.push_back(std::move(plane));
  }
  return annotated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coplanar repeated pattern discovery"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene");
  synth_cmd->add_option("--out", synth_args.out, "output scene file")->required();
  synth_cmd->add_option("--planes", synth_args.planes, "number of slanted planes");
  synth_cmd->add_option("--repeat", synth_args.repeat, "frames per plane");
  synth_cmd->add_option("--patterns", synth_args.patterns, "patterns per plane");
  synth_cmd->add_option("--pos-noise", synth_args.pos_noise, "frame position noise (px)");
  synth_cmd->add_option("--desc-noise", synth_args.desc_noise, "descriptor noise norm");
  synth_cmd->add_option("--grid", synth_args.grid, "region grid resolution");
  synth_cmd->add_option("--bg-keypoints", synth_args.bg_keypoints, "clutter keypoints");
  synth_cmd->add_flag("--periodic", synth_args.periodic, "plant frames on a lattice");
  synth_cmd->add_option("--symmetry", synth_args.symmetry, "none|rotated|reflected")
      ->check(CLI::IsMember({"none", "rotated", "reflected"}));
  synth_cmd->add_option("--width", synth_args.width, "image width");
  synth_cmd->add_option("--height", synth_args.height, "image height");
  synth_cmd->add_option("--slant", synth_args.slant, "vanishing line tilt");
  synth_cmd->add_option("--seed", synth_args.seed, "random seed");
  synth_cmd->add_flag("--no-gt", synth_args.no_gt, "omit ground truth");

  std::string scene_path, result_path, out_path, weights_path, cdf_path;
  coprep::SolverConfig solver_cfg;
  bool timing = false;

  CLI::App* propose_cmd = app.add_subcommand("propose", "bootstrap labeling and parameters");
  propose_cmd->add_option("--scene", scene_path, "scene file")->required();
  propose_cmd->add_option("--out", out_path, "output result file")->required();
  add_proposal_flags(propose_cmd, solver_cfg.proposal);

  CLI::App* solve_cmd = app.add_subcommand("solve", "run the full alternating minimization");
  solve_cmd->add_option("--scene", scene_path, "scene file")->required();
  solve_cmd->add_option("--out", out_path, "output result file")->required();
  solve_cmd->add_option("--weights", weights_path, "energy weights file");
  solve_cmd->add_option("--max-iters", solver_cfg.max_iters, "outer iteration cap");
  solve_cmd->add_option("--threads", solver_cfg.threads, "worker threads");
  solve_cmd->add_flag("--timing", timing, "record wall time in the result");
  add_proposal_flags(solve_cmd, solver_cfg.proposal);

  CLI::App* eval_cmd = app.add_subcommand("eval", "score a result against ground truth");
  eval_cmd->add_option("--scene", scene_path, "scene file with ground truth")->required();
  eval_cmd->add_option("--result", result_path, "result file")->required();
  eval_cmd->add_option("--out", out_path, "output report file")->required();
  eval_cmd->add_option("--cdf-svg", cdf_path, "also plot the distortion curve");

  CLI::App* render_cmd = app.add_subcommand("render", "draw a scene overlay");
  render_cmd->add_option("--scene", scene_path, "scene file")->required();
  render_cmd->add_option("--result", result_path, "result file to color by");
  render_cmd->add_option("--out", out_path, "output svg file")->required();

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "exhaustive labeling under ground-truth parameters");
  oracle_cmd->add_option("--scene", scene_path, "scene file with ground truth")->required();
  oracle_cmd->add_option("--out", out_path, "output result file")->required();
  oracle_cmd->add_option("--weights", weights_path, "energy weights file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth_cmd) {
      const coprep::SynthResult synth = coprep::generate(build_spec(synth_args));
      coprep::SceneFile scene;
      scene.data = synth.data;
      if (!synth_args.no_gt) {
        scene.gt_labeling = synth.gt_labeling;
        scene.gt_params = synth.gt_params;
      }
      coprep::save_scene(synth_args.out, scene);
    } else if (*propose_cmd) {
      const coprep::SceneFile scene = coprep::load_scene(scene_path);
      const coprep::Proposal prop = coprep::propose(scene.data, solver_cfg.proposal);
      coprep::ResultFile result;
      result.labeling = prop.labeling;
      result.params = prop.params;
      result.energy = coprep::total_energy(scene.data, prop.labeling, prop.params, solver_cfg.weights);
      result.initial_energy = result.energy;
      result.termination = "proposal-only";
      coprep::save_result(out_path, result);
    } else if (*solve_cmd) {
      const coprep::SceneFile scene = coprep::load_scene(scene_path);
      if (!weights_path.empty()) solver_cfg.weights = coprep::load_weights(weights_path);
      const auto start = std::chrono::steady_clock::now();
      const coprep::SolveReport report = coprep::solve(scene.data, solver_cfg);
      const auto stop = std::chrono::steady_clock::now();
      coprep::ResultFile result;
      result.labeling = report.labeling;
      result.params = report.params;
      result.initial_energy = report.initial_energy;
      result.energy = report.energy;
      result.iterations = report.iterations;
      result.termination = report.termination;
      if (timing) result.wall_seconds = std::chrono::duration<double>(stop - start).count();
      coprep::save_result(out_path, result);
    } else if (*eval_cmd) {
      const coprep::SceneFile scene = coprep::load_scene(scene_path);
      const coprep::ResultFile result = coprep::load_result(result_path);
      const std::vector<coprep::AnnotatedPlane> annotated = annotations_from_gt(scene);
      const std::vector<int> matched = coprep::match_planes(result.labeling, annotated);
      const std::vector<double> deltas =
          coprep::evaluate_rectifications(scene.data, result.labeling, result.params, annotated);
      const std::vector<double> thresholds = {1.0, 2.0, 5.0, 10.0};
      const std::vector<double> fractions = coprep::distortion_cdf(deltas, thresholds);

      nlohmann::ordered_json report;
      report["format"] = "eval";
      report["version"] = 1;
      report["deltas"] = deltas;
      report["matched_surfaces"] = matched;
      report["cdf"]["thresholds"] = thresholds;
      report["cdf"]["fractions"] = fractions;
      coprep::write_text_file(out_path, report.dump(2) + "\n");
      if (!cdf_path.empty()) coprep::write_text_file(cdf_path, coprep::render_cdf_svg(thresholds, fractions));
    } else if (*render_cmd) {
      const coprep::SceneFile scene = coprep::load_scene(scene_path);
      coprep::JointLabeling y;
      coprep::SceneParams params;
      if (!result_path.empty()) {
        const coprep::ResultFile result = coprep::load_result(result_path);
        y = result.labeling;
        params = result.params;
      } else if (scene.gt_labeling) {
        y = *scene.gt_labeling;
        if (scene.gt_params) params = *scene.gt_params;
      } else {
        y.keypoints.assign(scene.data.keypoints.size(), coprep::KeypointLabel{});
        y.regions.assign(scene.data.regions.size(), coprep::RegionLabel{});
      }
      coprep::write_text_file(out_path, coprep::render_scene_svg(scene.data, y, params));
    } else if (*oracle_cmd) {
      const coprep::SceneFile scene = coprep::load_scene(scene_path);
      if (!scene.gt_params) throw coprep::DataFormatError("scene carries no ground-truth parameters");
      coprep::EnergyWeights weights;
      if (!weights_path.empty()) weights = coprep::load_weights(weights_path);
      const auto [labeling, energy] = coprep::brute_force_labeling(scene.data, *scene.gt_params, weights);
      coprep::ResultFile result;
      result.labeling = labeling;
      result.params = *scene.gt_params;
      result.energy = energy;
      result.initial_energy = energy;
      result.termination = "exhaustive";
      coprep::save_result(out_path, result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
