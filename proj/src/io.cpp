#include "coprep/io.hpp"

#include <fstream>
#include <sstream>

#include "coprep/error.hpp"
#include "json.hpp"

namespace coprep {

namespace {

using Json = nlohmann::ordered_json;

Json vec_to_json(const VecXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json vec3_to_json(const Vec3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json mat3_to_json(const Mat3d& m) {
  Json arr = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) arr.push_back(m(r, c));
  }
  return arr;
}

VecXd vec_from_json(const Json& j, const char* field) {
  if (!j.is_array()) throw DataFormatError(std::string(field) + " must be an array");
  VecXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

Vec3d vec3_from_json(const Json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) throw DataFormatError(std::string(field) + " must have three entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Mat3d mat3_from_json(const Json& j, const char* field) {
  if (!j.is_array() || j.size() != 9) throw DataFormatError(std::string(field) + " must have nine entries");
  Mat3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
  }
  return m;
}

Json labeling_to_json(const JointLabeling& y) {
  Json j;
  Json kp = Json::array();
  for (const KeypointLabel& l : y.keypoints) kp.push_back(Json::array({l.group(), l.surface()}));
  Json rg = Json::array();
  for (const RegionLabel& l : y.regions) rg.push_back(l.surface);
  j["keypoints"] = std::move(kp);
  j["regions"] = std::move(rg);
  return j;
}

JointLabeling labeling_from_json(const Json& j) {
  JointLabeling y;
  for (const Json& e : j.at("keypoints")) {
    if (!e.is_array() || e.size() != 2) throw DataFormatError("keypoint label must be a [group, surface] pair");
    try {
      y.keypoints.emplace_back(e[0].get<int>(), e[1].get<int>());
    } catch (const std::invalid_argument& ex) {
      throw DataFormatError(std::string("bad keypoint label: ") + ex.what());
    }
  }
  for (const Json& e : j.at("regions")) {
    const int v = e.get<int>();
    if (v < 0) throw DataFormatError("region surface must be nonnegative");
    y.regions.push_back({v});
  }
  return y;
}

Json params_to_json(const SceneParams& p) {
  Json j;
  Json patterns = Json::array();
  for (const auto& [g, pat] : p.patterns) {
    Json e;
    e["group"] = g;
    e["mean_descriptor"] = vec_to_json(pat.mean_descriptor);
    Json scales = Json::array();
    for (const auto& [v, s] : pat.mean_log_rect_scale) scales.push_back(Json::array({v, s}));
    e["mean_log_rect_scale"] = std::move(scales);
    patterns.push_back(std::move(e));
  }
  j["patterns"] = std::move(patterns);

  Json lines = Json::array();
  for (const auto& [v, line] : p.plane_lines) lines.push_back(Json::array({v, vec3_to_json(line.coords())}));
  j["plane_lines"] = std::move(lines);

  Json gmms = Json::array();
  for (const auto& [v, gmm] : p.surface_gmms) {
    Json e;
    e["surface"] = v;
    Json comps = Json::array();
    for (const GmmComponent& c : gmm.components) {
      Json ce;
      ce["mean"] = vec3_to_json(c.mean);
      ce["cov"] = mat3_to_json(c.cov);
      ce["weight"] = c.weight;
      comps.push_back(std::move(ce));
    }
    e["components"] = std::move(comps);
    gmms.push_back(std::move(e));
  }
  j["surface_gmms"] = std::move(gmms);
  j["num_groups"] = p.num_groups;
  j["num_surfaces"] = p.num_surfaces;
  return j;
}

SceneParams params_from_json(const Json& j) {
  SceneParams p;
  for (const Json& e : j.at("patterns")) {
    PatternParams pat;
    pat.mean_descriptor = vec_from_json(e.at("mean_descriptor"), "mean_descriptor");
    for (const Json& s : e.at("mean_log_rect_scale")) {
      if (!s.is_array() || s.size() != 2) throw DataFormatError("scale mean must be a [surface, value] pair");
      pat.mean_log_rect_scale.emplace(s[0].get<int>(), s[1].get<double>());
    }
    const int g = e.at("group").get<int>();
    if (g <= 0) throw DataFormatError("pattern group ids are positive");
    p.patterns.emplace(g, std::move(pat));
  }
  for (const Json& e : j.at("plane_lines")) {
    if (!e.is_array() || e.size() != 2) throw DataFormatError("plane line must be a [surface, coords] pair");
    const int v = e[0].get<int>();
    if (v <= 0) throw DataFormatError("plane surface ids are positive");
    p.plane_lines.emplace(v, HomLine(vec3_from_json(e[1], "plane line coords")));
  }
  for (const Json& e : j.at("surface_gmms")) {
    SurfaceGmm gmm;
    for (const Json& ce : e.at("components")) {
      GmmComponent c;
      c.mean = vec3_from_json(ce.at("mean"), "component mean");
      c.cov = mat3_from_json(ce.at("cov"), "component cov");
      c.weight = ce.at("weight").get<double>();
      if (!(c.weight > 0)) throw DataFormatError("component weight must be positive");
      gmm.components.push_back(std::move(c));
    }
    if (gmm.components.empty()) throw DataFormatError("a mixture needs at least one component");
    const int v = e.at("surface").get<int>();
    if (v < 0) throw DataFormatError("mixture surface ids are nonnegative");
    p.surface_gmms.emplace(v, std::move(gmm));
  }
  p.num_groups = j.at("num_groups").get<int>();
  p.num_surfaces = j.at("num_surfaces").get<int>();
  return p;
}

Json parse_file(const std::string& path, const char* expected_format) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw DataFormatError(path + ": " + ex.what());
  }
  if (j.value("format", "") != expected_format) {
    throw DataFormatError(path + ": expected a " + expected_format + " file");
  }
  if (j.value("version", 0) != 1) throw DataFormatError(path + ": unsupported version");
  return j;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError("cannot write " + path);
  out << content;
  if (!out) throw DataFormatError("write failed for " + path);
}

SceneFile load_scene(const std::string& path) {
  const Json j = parse_file(path, "scene");
  SceneFile scene;
  try {
    scene.data.descriptor_dim = j.at("descriptor_dim").get<int>();
    for (const Json& e : j.at("keypoints")) {
      const Json& fr = e.at("frame");
      if (!fr.is_array() || fr.size() != 9) throw DataFormatError("keypoint frame must have nine entries");
      std::array<Vec3d, 3> frame;
      for (int w = 0; w < 3; ++w) {
        frame[w] = Vec3d(fr[3 * w].get<double>(), fr[3 * w + 1].get<double>(), fr[3 * w + 2].get<double>());
      }
      std::optional<Vec3d> color;
      if (e.contains("color")) color = vec3_from_json(e.at("color"), "keypoint color");
      scene.data.keypoints.push_back(make_keypoint(frame, vec_from_json(e.at("descriptor"), "descriptor"), color));
      if (scene.data.keypoints.back().descriptor.size() != scene.data.descriptor_dim) {
        throw DataFormatError("keypoint descriptor length disagrees with descriptor_dim");
      }
    }
    for (const Json& e : j.at("regions")) {
      Region r;
      const Json& c = e.at("centroid");
      if (!c.is_array() || c.size() != 2) throw DataFormatError("region centroid must have two entries");
      r.centroid = {c[0].get<double>(), c[1].get<double>()};
      r.pixel_count = e.at("pixel_count").get<std::int64_t>();
      for (const Json& s : e.at("samples")) r.samples.push_back(vec3_from_json(s, "region sample"));
      scene.data.regions.push_back(std::move(r));
    }
    for (const Json& e : j.at("region_edges")) {
      if (!e.is_array() || e.size() != 3) throw DataFormatError("region edge must be [a, b, contrast]");
      scene.data.region_edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    for (const Json& e : j.at("overlap_pairs")) {
      if (!e.is_array() || e.size() != 2) throw DataFormatError("overlap pair must be [keypoint, region]");
      scene.data.overlap_pairs.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    if (j.contains("ground_truth")) {
      const Json& gt = j.at("ground_truth");
      if (gt.contains("labeling")) scene.gt_labeling = labeling_from_json(gt.at("labeling"));
      if (gt.contains("params")) scene.gt_params = params_from_json(gt.at("params"));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataFormatError(path + ": " + ex.what());
  } catch (const Error& ex) {
    throw DataFormatError(path + ": " + ex.what());
  }
  try {
    finalize_scene(scene.data);
  } catch (const Error& ex) {
    throw DataFormatError(path + ": " + ex.what());
  }
  if (scene.gt_labeling && (scene.gt_labeling->keypoints.size() != scene.data.keypoints.size() ||
                            scene.gt_labeling->regions.size() != scene.data.regions.size())) {
    throw DataFormatError(path + ": ground-truth labeling size mismatch");
  }
  return scene;
}

void save_scene(const std::string& path, const SceneFile& scene) {
  Json j;
  j["format"] = "scene";
  j["version"] = 1;
  j["descriptor_dim"] = scene.data.descriptor_dim;
  Json kps = Json::array();
  for (const Keypoint& kp : scene.data.keypoints) {
    Json e;
    Json fr = Json::array();
    for (const HomPoint& p : kp.frame) {
      fr.push_back(p.x());
      fr.push_back(p.y());
      fr.push_back(p.z());
    }
    e["frame"] = std::move(fr);
    e["descriptor"] = vec_to_json(kp.descriptor);
    if (kp.color) e["color"] = vec3_to_json(*kp.color);
    kps.push_back(std::move(e));
  }
  j["keypoints"] = std::move(kps);

  Json regions = Json::array();
  for (const Region& r : scene.data.regions) {
    Json e;
    e["centroid"] = Json::array({r.centroid.x(), r.centroid.y()});
    e["pixel_count"] = r.pixel_count;
    Json samples = Json::array();
    for (const Vec3d& s : r.samples) samples.push_back(vec3_to_json(s));
    e["samples"] = std::move(samples);
    regions.push_back(std::move(e));
  }
  j["regions"] = std::move(regions);

  Json edges = Json::array();
  for (const RegionEdge& e : scene.data.region_edges) edges.push_back(Json::array({e.a, e.b, e.contrast}));
  j["region_edges"] = std::move(edges);
  Json overlaps = Json::array();
  for (const auto& p : scene.data.overlap_pairs) overlaps.push_back(Json::array({p[0], p[1]}));
  j["overlap_pairs"] = std::move(overlaps);

  if (scene.gt_labeling || scene.gt_params) {
    Json gt;
    if (scene.gt_labeling) gt["labeling"] = labeling_to_json(*scene.gt_labeling);
    if (scene.gt_params) gt["params"] = params_to_json(*scene.gt_params);
    j["ground_truth"] = std::move(gt);
  }
  write_text_file(path, j.dump(2) + "\n");
}

ResultFile load_result(const std::string& path) {
  const Json j = parse_file(path, "result");
  ResultFile r;
  try {
    r.labeling = labeling_from_json(j.at("labeling"));
    r.params = params_from_json(j.at("params"));
    r.initial_energy = j.at("initial_energy").get<double>();
    r.energy = j.at("energy").get<double>();
    for (const Json& e : j.at("iterations")) {
      IterationRecord rec;
      rec.energy_after_labeling = e.at("after_labeling").get<double>();
      rec.energy_after_regression = e.at("after_regression").get<double>();
      rec.moves = e.at("moves").get<int>();
      rec.sweeps = e.at("sweeps").get<int>();
      r.iterations.push_back(rec);
    }
    r.termination = j.at("termination").get<std::string>();
    if (j.contains("wall_seconds")) r.wall_seconds = j.at("wall_seconds").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataFormatError(path + ": " + ex.what());
  }
  return r;
}

void save_result(const std::string& path, const ResultFile& result) {
  Json j;
  j["format"] = "result";
  j["version"] = 1;
  j["labeling"] = labeling_to_json(result.labeling);
  j["params"] = params_to_json(result.params);
  j["initial_energy"] = result.initial_energy;
  j["energy"] = result.energy;
  Json iters = Json::array();
  for (const IterationRecord& rec : result.iterations) {
    Json e;
    e["after_labeling"] = rec.energy_after_labeling;
    e["after_regression"] = rec.energy_after_regression;
    e["moves"] = rec.moves;
    e["sweeps"] = rec.sweeps;
    iters.push_back(std::move(e));
  }
  j["iterations"] = std::move(iters);
  j["termination"] = result.termination;
  if (result.wall_seconds) j["wall_seconds"] = *result.wall_seconds;
  write_text_file(path, j.dump(2) + "\n");
}

EnergyWeights load_weights(const std::string& path) {
  EnergyWeights w;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    std::string value;
    if (!(ls >> value)) {
      throw DataFormatError(path + ":" + std::to_string(line_no) + ": missing value for " + name);
    }
    std::string extra;
    if (ls >> extra) throw DataFormatError(path + ":" + std::to_string(line_no) + ": trailing tokens");

    const auto as_number = [&]() {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
      } catch (const std::exception&) {
        throw DataFormatError(path + ":" + std::to_string(line_no) + ": bad number '" + value + "'");
      }
    };

    if (name == "w_scale") {
      w.w_scale = as_number();
    } else if (name == "w_app") {
      w.w_app = as_number();
    } else if (name == "w_color") {
      w.w_color = as_number();
    } else if (name == "w_kp_contrast") {
      w.w_kp_contrast = as_number();
    } else if (name == "w_rgn_contrast") {
      w.w_rgn_contrast = as_number();
    } else if (name == "w_overlap") {
      w.w_overlap = as_number();
    } else if (name == "w_singleton") {
      w.w_singleton = as_number();
    } else if (name == "w_planar_singleton") {
      w.w_planar_singleton = as_number();
    } else if (name == "subset_cost_plane") {
      w.subset_cost_plane = as_number();
    } else if (name == "subset_cost_pattern") {
      w.subset_cost_pattern = as_number();
    } else if (name == "sigma1_sq") {
      w.sigma1_sq = as_number();
    } else if (name == "sigma2_sq") {
      w.sigma2_sq = as_number();
    } else if (name == "lambda") {
      if (value == "auto") {
        w.lambda.reset();
      } else {
        w.lambda = as_number();
      }
    } else {
      throw DataFormatError(path + ":" + std::to_string(line_no) + ": unknown name '" + name + "'");
    }
  }
  try {
    validate_weights(w);
  } catch (const Error& ex) {
    throw DataFormatError(path + ": " + ex.what());
  }
  return w;
}

void save_weights(const std::string& path, const EnergyWeights& weights) {
  std::ostringstream out;
  out.precision(17);
  out << "w_scale " << weights.w_scale << "\n";
  out << "w_app " << weights.w_app << "\n";
  out << "w_color " << weights.w_color << "\n";
  out << "w_kp_contrast " << weights.w_kp_contrast << "\n";
  out << "w_rgn_contrast " << weights.w_rgn_contrast << "\n";
  out << "w_overlap " << weights.w_overlap << "\n";
  out << "w_singleton " << weights.w_singleton << "\n";
  out << "w_planar_singleton " << weights.w_planar_singleton << "\n";
  out << "subset_cost_plane " << weights.subset_cost_plane << "\n";
  out << "subset_cost_pattern " << weights.subset_cost_pattern << "\n";
  out << "sigma1_sq " << weights.sigma1_sq << "\n";
  out << "sigma2_sq " << weights.sigma2_sq << "\n";
  if (weights.lambda) {
    out << "lambda " << *weights.lambda << "\n";
  } else {
    out << "lambda auto\n";
  }
  write_text_file(path, out.str());
}

}  // namespace coprep
