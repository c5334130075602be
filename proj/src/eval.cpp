#include "coprep/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "coprep/error.hpp"

namespace coprep {

Affine2 fit_affine(const std::vector<Vec2d>& src, const std::vector<Vec2d>& dst) {
  if (src.size() != dst.size()) throw DegenerateCorrespondences("point lists differ in size");
  const int n = static_cast<int>(src.size());
  if (n < 3) throw DegenerateCorrespondences("an affinity needs at least three point pairs");

  MatXd x(n, 3);
  MatXd rhs(n, 2);
  for (int i = 0; i < n; ++i) {
    x.row(i) << src[i].x(), src[i].y(), 1.0;
    rhs.row(i) << dst[i].x(), dst[i].y();
  }
  const Eigen::ColPivHouseholderQR<MatXd> qr(x);
  if (qr.rank() < 3) throw DegenerateCorrespondences("source points are collinear");
  const MatXd sol = qr.solve(rhs);  // columns: x' and y' coefficients

  Affine2 a;
  a.linear << sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1);
  a.offset << sol(2, 0), sol(2, 1);
  return a;
}

double delta_rms(const SceneData& data, const std::vector<int>& members, const Mat3d& detected,
                 const Mat3d& annotated) {
  if (members.empty()) throw DegenerateCorrespondences("no annotated members");

  std::vector<Vec2d> ann_pts;
  std::vector<Vec2d> det_pts;
  std::vector<Vec2d> img_pts;
  ann_pts.reserve(members.size() * 3);
  det_pts.reserve(members.size() * 3);
  img_pts.reserve(members.size() * 3);
  for (int i : members) {
    for (const HomPoint& p : data.keypoints[i].frame) {
      ann_pts.push_back(dehomogenize<double>(annotated * p));
      det_pts.push_back(dehomogenize<double>(detected * p));
      img_pts.push_back(dehomogenize<double>(p));
    }
  }

  // A absorbs the affine ambiguity of rectification: annotated-rectified ->
  // detected-rectified.
  const Affine2 a = fit_affine(ann_pts, det_pts);
  const double det = a.linear.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw DegenerateCorrespondences("fitted affinity is singular");
  }
  const Eigen::Matrix2d inv_linear = a.linear.inverse();
  const Mat3d ann_inv = annotated.inverse();

  double sum = 0.0;
  for (std::size_t k = 0; k < det_pts.size(); ++k) {
    const Vec2d back = inv_linear * (det_pts[k] - a.offset);
    const Vec2d rewarped = dehomogenize<double>(ann_inv * HomPoint(back.x(), back.y(), 1.0));
    sum += (rewarped - img_pts[k]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(det_pts.size()));
}

double delta_rms(const SceneData& data, const std::vector<int>& members, const HomLine& detected,
                 const HomLine& annotated) {
  return delta_rms(data, members, rectifier_from_line(detected), rectifier_from_line(annotated));
}

std::vector<int> match_planes(const JointLabeling& y, const std::vector<AnnotatedPlane>& annotated) {
  std::map<int, std::set<int>> detected;  // surface -> keypoint support
  for (int i = 0; i < static_cast<int>(y.keypoints.size()); ++i) {
    const int v = y.keypoints[i].surface();
    if (v != kBackground) detected[v].insert(i);
  }

  std::vector<int> match;
  for (const AnnotatedPlane& plane : annotated) {
    int best_v = 0;
    double best_frac = 0.0;
    std::size_t best_support = 0;
    for (const auto& [v, support] : detected) {
      std::size_t overlap = 0;
      for (int i : plane.keypoints) overlap += support.count(i);
      if (overlap == 0) continue;
      const double frac = static_cast<double>(overlap) / static_cast<double>(plane.keypoints.size());
      const bool better = frac > best_frac || (frac == best_frac && support.size() > best_support);
      // Equal on both: keep the lower id, i.e. the earlier map entry.
      if (best_v == 0 || better) {
        best_v = v;
        best_frac = frac;
        best_support = support.size();
      }
    }
    match.push_back(best_v);
  }
  return match;
}

std::vector<double> evaluate_rectifications(const SceneData& data, const JointLabeling& y, const SceneParams& params,
                                            const std::vector<AnnotatedPlane>& annotated) {
  const std::vector<int> match = match_planes(y, annotated);
  std::vector<double> deltas;
  deltas.reserve(annotated.size());
  for (std::size_t a = 0; a < annotated.size(); ++a) {
    const int v = match[a];
    const auto lit = v == 0 ? params.plane_lines.end() : params.plane_lines.find(v);
    if (v == 0 || lit == params.plane_lines.end()) {
      deltas.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      deltas.push_back(delta_rms(data, annotated[a].keypoints, lit->second, annotated[a].line));
    } catch (const MapsToInfinity&) {
      deltas.push_back(std::numeric_limits<double>::infinity());
    }
  }
  return deltas;
}

std::vector<double> distortion_cdf(const std::vector<double>& deltas, const std::vector<double>& thresholds) {
  std::vector<double> cdf;
  cdf.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t hit = 0;
    for (double d : deltas) {
      if (d <= t) ++hit;
    }
    cdf.push_back(deltas.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(deltas.size()));
  }
  return cdf;
}

}  // namespace coprep
