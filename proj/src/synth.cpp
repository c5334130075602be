#include "coprep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coprep/error.hpp"
#include "coprep/expansion.hpp"
#include "coprep/regression.hpp"
#include "coprep/rng.hpp"

namespace coprep {

namespace {

const std::vector<Vec3d>& fallback_palette(int surface) {
  static const std::vector<std::vector<Vec3d>> palettes = {
      {{0.35, 0.35, 0.38}, {0.45, 0.45, 0.48}},  // background grays
      {{0.75, 0.25, 0.20}, {0.85, 0.45, 0.35}},  // warm reds
      {{0.20, 0.45, 0.75}, {0.35, 0.60, 0.85}},  // blues
      {{0.25, 0.65, 0.30}, {0.40, 0.75, 0.45}},  // greens
      {{0.75, 0.65, 0.20}, {0.85, 0.78, 0.40}},  // yellows
      {{0.55, 0.30, 0.65}, {0.70, 0.45, 0.80}},  // violets
      {{0.20, 0.60, 0.60}, {0.35, 0.75, 0.75}},  // teals
      {{0.70, 0.45, 0.25}, {0.80, 0.60, 0.40}},  // browns
      {{0.60, 0.25, 0.45}, {0.75, 0.40, 0.60}},  // magentas
  };
  return palettes[static_cast<std::size_t>(surface) % palettes.size()];
}

Vec3d clamp01(const Vec3d& c) { return c.cwiseMax(0.0).cwiseMin(1.0); }

struct Quad {
  std::array<Vec2d, 4> corners;
  bool contains(const Vec2d& p) const {
    // Consistent cross-product signs against the (convex) boundary.
    double ref = 0.0;
    for (int i = 0; i < 4; ++i) {
      const Vec2d a = corners[i];
      const Vec2d b = corners[(i + 1) % 4];
      const double cr = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
      if (ref == 0.0) {
        ref = cr;
      } else if (cr * ref < 0.0) {
        return false;
      }
    }
    return true;
  }
  void bounds(Vec2d& lo, Vec2d& hi) const {
    lo = corners[0];
    hi = corners[0];
    for (const Vec2d& c : corners) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  }
};

// Equal-area triangle around the origin; rotations and reflections keep the
// area exact, so planted instances of one pattern share rectified scale.
std::array<Vec2d, 3> base_triangle(double area, double angle, bool mirror) {
  const double side = std::sqrt(4.0 * area / std::sqrt(3.0));
  const double r = side / std::sqrt(3.0);  // circumradius
  std::array<Vec2d, 3> tri;
  for (int k = 0; k < 3; ++k) {
    const double a = angle + 2.0 * std::numbers::pi * k / 3.0;
    tri[k] = {r * std::cos(a), r * std::sin(a)};
  }
  if (mirror) {
    for (Vec2d& p : tri) p.x() = -p.x();
    std::swap(tri[1], tri[2]);  // keep vertex order orientation-consistent
  }
  return tri;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  if (spec.width < 16 || spec.height < 16) throw SpecInfeasible("image too small");
  if (spec.grid < 1) throw SpecInfeasible("region grid must be at least 1x1");
  if (spec.samples_per_region < 1) throw SpecInfeasible("regions need at least one color sample");
  if (spec.descriptor_dim < 3) throw SpecInfeasible("descriptor dimension too small");
  for (const PlaneSpec& pl : spec.planes) {
    if (pl.repeat_count < 2) throw SpecInfeasible("a plane needs at least two frames");
    if (pl.num_patterns < 1 || pl.num_patterns > pl.repeat_count) {
      throw SpecInfeasible("pattern count must be in [1, repeat_count]");
    }
    if (!(pl.template_area > 0)) throw SpecInfeasible("template area must be positive");
  }

  Rng rng(spec.seed);
  SynthResult out;
  const int num_planes = static_cast<int>(spec.planes.size());
  const double strip_w = static_cast<double>(spec.width) / static_cast<double>(num_planes + 1);

  int group_id = 0;
  for (int pi = 0; pi < num_planes; ++pi) {
    const PlaneSpec& pl = spec.planes[pi];
    const HomLine line(pl.line);
    const Mat3d rect = rectifier_from_line(line);
    const Mat3d back = rect.transpose();
    const double x0 = pi * strip_w;
    const double x1 = (pi + 1) * strip_w;

    Quad q;
    const std::array<Vec2d, 4> strip = {Vec2d{x0, 0.0}, Vec2d{x1, 0.0}, Vec2d{x1, double(spec.height)},
                                        Vec2d{x0, double(spec.height)}};
    for (int c = 0; c < 4; ++c) {
      const Vec3d hom(strip[c].x(), strip[c].y(), 1.0);
      if (!(line.signed_side(hom) > 1e-6)) throw SpecInfeasible("vanishing line crosses its plane's strip");
      q.corners[c] = dehomogenize<double>(rect * hom);
    }

    const auto plant_center = [&](const Vec2d& center, double area) -> bool {
      const bool mirror = pl.symmetry == Symmetry::Reflected && rng.uniform() < 0.5;
      const double angle = pl.symmetry == Symmetry::None ? 0.0 : rng.uniform(0.0, 2.0 * std::numbers::pi);
      const std::array<Vec2d, 3> tri = base_triangle(area, angle, mirror);
      std::array<Vec3d, 3> img;
      for (int k = 0; k < 3; ++k) {
        const Vec2d rp = center + tri[k];
        if (!q.contains(rp)) return false;
        const Vec3d b = back * Vec3d(rp.x(), rp.y(), 1.0);
        if (std::abs(b.z()) <= kHomEps * b.norm()) return false;
        Vec3d p = b / b.z();
        p.x() += spec.sigma_pos * rng.normal();
        p.y() += spec.sigma_pos * rng.normal();
        if (p.x() < x0 || p.x() >= x1 || p.y() < 0 || p.y() >= spec.height) return false;
        if (!(line.signed_side(p) > 0.0)) return false;
        img[k] = p;
      }
      const Vec2d a = img[0].head<2>(), b2 = img[1].head<2>(), c2 = img[2].head<2>();
      if (std::abs(signed_triangle_area<double>(a, b2, c2)) <= 1e-9) return false;
      out.data.keypoints.push_back({});
      out.data.keypoints.back().frame = {img[0], img[1], img[2]};
      return true;
    };

    for (int pk = 0; pk < pl.num_patterns; ++pk) {
      ++group_id;
      const int count = pl.repeat_count / pl.num_patterns + (pk < pl.repeat_count % pl.num_patterns ? 1 : 0);
      const double area = pl.template_area * (1.0 + 0.35 * pk);
      const VecXd proto = rng.random_unit_vector(spec.descriptor_dim);
      const std::vector<Vec3d>& pal = pl.palette.empty() ? fallback_palette(pi + 1) : pl.palette;
      const Vec3d base_color = pal[pk % pal.size()];
      Vec2d lo, hi;
      q.bounds(lo, hi);

      std::vector<Vec2d> centers;
      if (pl.placement == Placement::Periodic) {
        const double span_x = hi.x() - lo.x();
        const double span_y = hi.y() - lo.y();
        const double spacing = std::sqrt(span_x * span_y / (4.0 * count));
        if (!(spacing > 0)) throw SpecInfeasible("degenerate rectified strip");
        // Inset by the frame circumradius so boundary nodes stay plantable,
        // and keep the whole lattice: nodes the planter rejects are skipped
        // and the surplus is the slack.
        const double margin = std::sqrt(4.0 * area / std::sqrt(3.0)) / std::sqrt(3.0);
        const double jx = rng.uniform(0.0, spacing);
        const double jy = rng.uniform(0.0, spacing);
        for (double y = lo.y() + margin + jy; y <= hi.y() - margin; y += spacing) {
          for (double x = lo.x() + margin + jx; x <= hi.x() - margin; x += spacing) {
            centers.push_back({x, y});
          }
        }
        if (static_cast<int>(centers.size()) < count) throw SpecInfeasible("lattice does not fit the strip");
      }

      int placed = 0;
      int attempts = 0;
      const int max_attempts = 200 * count;
      std::size_t lattice_at = 0;
      while (placed < count) {
        if (++attempts > max_attempts) throw SpecInfeasible("could not place the requested frames");
        Vec2d center;
        if (pl.placement == Placement::Periodic) {
          if (lattice_at >= centers.size()) throw SpecInfeasible("lattice does not fit the strip");
          center = centers[lattice_at++];
        } else {
          center = {rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y())};
        }
        if (!plant_center(center, area)) continue;

        Keypoint& kp = out.data.keypoints.back();
        VecXd desc = proto;
        if (spec.sigma_desc > 0) {
          desc += (spec.sigma_desc / std::sqrt(double(spec.descriptor_dim))) * rng.normal_vector(spec.descriptor_dim);
        }
        kp.descriptor = desc / desc.norm();
        kp.color = clamp01(base_color + spec.color_jitter * rng.normal3());
        out.gt_labeling.keypoints.emplace_back(group_id, pi + 1);
        ++placed;
      }
    }
    out.gt_params.plane_lines.emplace(pi + 1, line);
  }

  for (int b = 0; b < spec.background_keypoints; ++b) {
    const double x0 = num_planes * strip_w;
    const double side = std::sqrt(4.0 * 40.0 * rng.uniform(0.5, 2.0) / std::sqrt(3.0));
    const Vec2d center{rng.uniform(x0 + side, spec.width - side), rng.uniform(side, spec.height - side)};
    const std::array<Vec2d, 3> tri =
        base_triangle(0.25 * side * side, rng.uniform(0.0, 2.0 * std::numbers::pi), false);
    Keypoint kp;
    for (int k = 0; k < 3; ++k) {
      kp.frame[k] = Vec3d(center.x() + tri[k].x(), center.y() + tri[k].y(), 1.0);
    }
    kp.descriptor = rng.random_unit_vector(spec.descriptor_dim);
    const auto& pal = spec.background_palette.empty() ? fallback_palette(0) : spec.background_palette;
    kp.color = clamp01(pal[rng.index(pal.size())] + spec.color_jitter * rng.normal3());
    out.data.keypoints.push_back(std::move(kp));
    out.gt_labeling.keypoints.emplace_back(kNoGroup, kBackground);
  }

  // Region grid, row-major; each cell is colored by the strip under its
  // center.
  const double cw = static_cast<double>(spec.width) / spec.grid;
  const double ch = static_cast<double>(spec.height) / spec.grid;
  const auto owner_of = [&](double x) {
    const int strip = std::min(num_planes, static_cast<int>(x / strip_w));
    return strip < num_planes ? strip + 1 : kBackground;
  };
  for (int gy = 0; gy < spec.grid; ++gy) {
    for (int gx = 0; gx < spec.grid; ++gx) {
      Region r;
      r.centroid = {(gx + 0.5) * cw, (gy + 0.5) * ch};
      r.pixel_count = std::max<std::int64_t>(1, static_cast<std::int64_t>(cw * ch));
      const int owner = owner_of(r.centroid.x());
      const auto& pal = owner == kBackground
                            ? (spec.background_palette.empty() ? fallback_palette(0) : spec.background_palette)
                            : (spec.planes[owner - 1].palette.empty() ? fallback_palette(owner)
                                                                      : spec.planes[owner - 1].palette);
      for (int s = 0; s < spec.samples_per_region; ++s) {
        r.samples.push_back(clamp01(pal[rng.index(pal.size())] + spec.color_jitter * rng.normal3()));
      }
      out.data.regions.push_back(std::move(r));
      out.gt_labeling.regions.push_back({owner});
    }
  }

  const auto cell_mean = [&](int j) {
    Vec3d m = Vec3d::Zero();
    for (const Vec3d& s : out.data.regions[j].samples) m += s;
    return Vec3d(m / static_cast<double>(out.data.regions[j].samples.size()));
  };
  for (int gy = 0; gy < spec.grid; ++gy) {
    for (int gx = 0; gx < spec.grid; ++gx) {
      const int j = gy * spec.grid + gx;
      if (gx + 1 < spec.grid) {
        const double con = 10.0 * (cell_mean(j) - cell_mean(j + 1)).norm() / std::sqrt(3.0);
        out.data.region_edges.push_back({j, j + 1, con});
      }
      if (gy + 1 < spec.grid) {
        const double con = 10.0 * (cell_mean(j) - cell_mean(j + spec.grid)).norm() / std::sqrt(3.0);
        out.data.region_edges.push_back({j, j + spec.grid, con});
      }
    }
  }

  for (int i = 0; i < static_cast<int>(out.data.keypoints.size()); ++i) {
    const Vec2d c = dehomogenize<double>(keypoint_centroid(out.data.keypoints[i]));
    const int gx = std::clamp(static_cast<int>(c.x() / cw), 0, spec.grid - 1);
    const int gy = std::clamp(static_cast<int>(c.y() / ch), 0, spec.grid - 1);
    out.data.overlap_pairs.push_back({i, gy * spec.grid + gx});
  }

  out.data.descriptor_dim = spec.descriptor_dim;
  finalize_scene(out.data);

  out.gt_params.num_groups = group_id;
  out.gt_params.num_surfaces = num_planes;
  out.gt_params.patterns = update_pattern_params(out.data, out.gt_labeling, out.gt_params.plane_lines);
  std::map<int, std::vector<int>> members_by_surface;
  for (int j = 0; j < static_cast<int>(out.data.regions.size()); ++j) {
    members_by_surface[out.gt_labeling.regions[j].surface].push_back(j);
  }
  for (int v = 0; v <= num_planes; ++v) {
    std::vector<Vec3d> samples;
    std::vector<double> wts;
    const auto it = members_by_surface.find(v);
    if (it != members_by_surface.end()) {
      for (int j : it->second) {
        for (const Vec3d& s : out.data.regions[j].samples) {
          samples.push_back(s);
          wts.push_back(1.0 / static_cast<double>(out.data.regions[j].samples.size()));
        }
      }
    }
    Rng sub = rng.fork(300 + static_cast<std::uint64_t>(v));
    out.gt_params.surface_gmms.emplace(
        v, samples.empty() ? default_surface_gmm() : fit_surface_gmm(samples, 5, 10, sub, &wts));
  }
  return out;
}

std::pair<JointLabeling, double> brute_force_labeling(const SceneData& data, const SceneParams& params,
                                                      const EnergyWeights& weights) {
  const LabelUniverse universe = make_universe(params);
  const LabelingProblem problem = build_labeling_problem(data, params, universe, weights);
  const int n = problem.num_sites();

  std::vector<std::vector<int>> feasible(n);
  double combos = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < problem.num_labels(); ++l) {
      if (problem.feasible(i, l)) feasible[i].push_back(l);
    }
    if (feasible[i].empty()) throw Error("a site has no feasible label");
    combos *= static_cast<double>(feasible[i].size());
    if (combos > 1e7) throw TooLarge("assignment space exceeds the enumeration budget");
  }

  std::vector<int> at(n, 0);
  std::vector<int> current(n);
  std::vector<int> best;
  double best_energy = kInfCost;
  bool found = false;
  while (true) {
    for (int i = 0; i < n; ++i) current[i] = feasible[i][at[i]];
    const double e = problem.energy(current);
    if (!found || e < best_energy) {
      best_energy = e;
      best = current;
      found = true;
    }
    int carry = 0;
    while (carry < n && ++at[carry] == static_cast<int>(feasible[carry].size())) {
      at[carry] = 0;
      ++carry;
    }
    if (carry == n) break;
  }
  JointLabeling y = decode_labeling(best, universe, static_cast<int>(data.keypoints.size()),
                                    static_cast<int>(data.regions.size()));
  return {std::move(y), best_energy};
}

HomLine grid_search_line(const SceneData& data, const std::vector<std::vector<int>>& groups, int resolution) {
  double best = std::numeric_limits<double>::infinity();
  Vec3d best_dir = Vec3d::Zero();
  for (int a = 0; a < resolution; ++a) {
    const double theta = std::numbers::pi * (a + 0.5) / resolution;
    for (int b = 0; b < 2 * resolution; ++b) {
      const double phi = std::numbers::pi * (b + 0.5) / resolution;
      const Vec3d dir(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      const HomLine line(dir);
      double f = 0.0;
      bool ok = true;
      std::vector<double> zs;
      for (const std::vector<int>& g : groups) {
        if (!ok) break;
        if (g.empty()) continue;
        zs.clear();
        double sum = 0.0;
        for (int i : g) {
          if (!same_side(line, data.keypoints[i])) {
            ok = false;
            break;
          }
          const double z = rectified_log_scale(line, data.keypoints[i]);
          zs.push_back(z);
          sum += z;
        }
        if (!ok) break;
        const double mean = sum / static_cast<double>(zs.size());
        for (double z : zs) f += (z - mean) * (z - mean);
      }
      if (ok && f < best) {
        best = f;
        best_dir = dir;
      }
    }
  }
  if (!(best_dir.norm() > 0)) throw Error("no feasible direction on the search grid");
  return HomLine(best_dir);
}

}  // namespace coprep
