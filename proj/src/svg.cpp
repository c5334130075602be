#include "coprep/svg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "coprep/error.hpp"

namespace coprep {

namespace {

const char* kGroupColors[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
                              "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080"};
const char* kSurfaceColors[] = {"#bdbdbd", "#ffd8b1", "#c8f7c5", "#cfe2ff", "#f5d6eb",
                                "#fff3bf", "#d0f0fd", "#ffd6d6", "#e0d4fd"};

const char* group_color(int g) { return kGroupColors[static_cast<std::size_t>(g) % std::size(kGroupColors)]; }
const char* surface_color(int v) {
  return kSurfaceColors[static_cast<std::size_t>(v) % std::size(kSurfaceColors)];
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// Intersections of the line with the viewport border, for drawing.
std::vector<Vec2d> clip_line(const Vec3d& l, double x0, double y0, double x1, double y1) {
  std::vector<Vec2d> pts;
  const auto push_if_inside = [&](double x, double y) {
    if (x >= x0 - 1e-9 && x <= x1 + 1e-9 && y >= y0 - 1e-9 && y <= y1 + 1e-9) {
      for (const Vec2d& p : pts) {
        if ((p - Vec2d(x, y)).norm() < 1e-6) return;
      }
      pts.push_back({x, y});
    }
  };
  // l = (a, b, c): a x + b y + c = 0 against each border.
  if (std::abs(l.y()) > 1e-12) {
    push_if_inside(x0, -(l.x() * x0 + l.z()) / l.y());
    push_if_inside(x1, -(l.x() * x1 + l.z()) / l.y());
  }
  if (std::abs(l.x()) > 1e-12) {
    push_if_inside(-(l.y() * y0 + l.z()) / l.x(), y0);
    push_if_inside(-(l.y() * y1 + l.z()) / l.x(), y1);
  }
  return pts;
}

}  // namespace

std::string render_scene_svg(const SceneData& data, const JointLabeling& y, const SceneParams& params) {
  if (y.keypoints.size() != data.keypoints.size() || y.regions.size() != data.regions.size()) {
    throw Error("labeling does not match the scene");
  }
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  bool first = true;
  const auto grow = [&](const Vec2d& p) {
    if (first) {
      x0 = x1 = p.x();
      y0 = y1 = p.y();
      first = false;
      return;
    }
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  };
  for (const Keypoint& kp : data.keypoints) {
    for (const HomPoint& p : kp.frame) grow(p.head<2>());
  }
  for (const Region& r : data.regions) grow(r.centroid);
  const double pad = 0.05 * std::max(x1 - x0, y1 - y0) + 1.0;
  x0 -= pad;
  y0 -= pad;
  x1 += pad;
  y1 += pad;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(x0) << " " << fmt(y0) << " "
      << fmt(x1 - x0) << " " << fmt(y1 - y0) << "\">\n";
  svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0) << "\" height=\""
      << fmt(y1 - y0) << "\" fill=\"#ffffff\"/>\n";

  for (std::size_t j = 0; j < data.regions.size(); ++j) {
    const Region& r = data.regions[j];
    const double radius = std::sqrt(static_cast<double>(r.pixel_count) / std::numbers::pi);
    svg << "<circle cx=\"" << fmt(r.centroid.x()) << "\" cy=\"" << fmt(r.centroid.y()) << "\" r=\"" << fmt(radius)
        << "\" fill=\"" << surface_color(y.regions[j].surface) << "\" fill-opacity=\"0.55\"/>\n";
  }

  for (std::size_t i = 0; i < data.keypoints.size(); ++i) {
    const Keypoint& kp = data.keypoints[i];
    svg << "<polygon points=\"";
    for (int w = 0; w < 3; ++w) {
      if (w) svg << " ";
      svg << fmt(kp.frame[w].x()) << "," << fmt(kp.frame[w].y());
    }
    const int g = y.keypoints[i].group();
    svg << "\" fill=\"" << (g == kNoGroup ? "#666666" : group_color(g)) << "\" fill-opacity=\"0.8\" stroke=\"#222222\""
        << " stroke-width=\"0.5\"/>\n";
  }

  for (const auto& [v, line] : params.plane_lines) {
    const std::vector<Vec2d> pts = clip_line(line.coords(), x0, y0, x1, y1);
    if (pts.size() >= 2) {
      svg << "<line x1=\"" << fmt(pts[0].x()) << "\" y1=\"" << fmt(pts[0].y()) << "\" x2=\"" << fmt(pts[1].x())
          << "\" y2=\"" << fmt(pts[1].y()) << "\" stroke=\"" << surface_color(v)
          << "\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_cdf_svg(const std::vector<double>& thresholds, const std::vector<double>& fractions) {
  if (thresholds.size() != fractions.size()) throw Error("threshold and fraction counts differ");
  const double w = 420, h = 300, ml = 50, mb = 40, mt = 15, mr = 15;
  const double max_t = thresholds.empty() ? 1.0 : *std::max_element(thresholds.begin(), thresholds.end());

  const auto px = [&](double t) { return ml + (w - ml - mr) * (max_t > 0 ? t / max_t : 0.0); };
  const auto py = [&](double f) { return h - mb - (h - mb - mt) * f; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << w - mr << "\" y2=\"" << py(0)
      << "\" stroke=\"#333333\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << ml << "\" y2=\"" << mt
      << "\" stroke=\"#333333\"/>\n";
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    svg << "<line x1=\"" << ml << "\" y1=\"" << py(f) << "\" x2=\"" << w - mr << "\" y2=\"" << py(f)
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(f) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << f
        << "</text>\n";
  }
  if (!thresholds.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#4363d8\" stroke-width=\"2\" points=\"";
    svg << px(0) << "," << py(0) << " ";
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      svg << px(thresholds[i]) << "," << py(fractions[i]);
      if (i + 1 < thresholds.size()) svg << " ";
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      svg << "<circle cx=\"" << px(thresholds[i]) << "\" cy=\"" << py(fractions[i])
          << "\" r=\"3\" fill=\"#4363d8\"/>\n";
      svg << "<text x=\"" << px(thresholds[i]) << "\" y=\"" << h - mb + 16
          << "\" text-anchor=\"middle\" font-size=\"11\">" << thresholds[i] << "</text>\n";
    }
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << "distortion threshold (px)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace coprep
