#pragma once

// Slow reference implementations the tests compare the library against.
// Everything here is written independently of the code under test: flows go
// through Edmonds-Karp on a dense capacity matrix, labelings are scored by a
// direct reading of the cost definition and minimized by enumeration.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "coprep/expansion.hpp"
#include "coprep/scene_data.hpp"
#include "coprep/types.hpp"

namespace oracle {

// Max flow on a dense capacity matrix via shortest augmenting paths.
// Nodes 0..n-1 are internal, n is the source, n+1 the sink.
struct FlowNetwork {
  int n = 0;
  std::vector<std::vector<double>> cap;

  explicit FlowNetwork(int nodes) : n(nodes), cap(nodes + 2, std::vector<double>(nodes + 2, 0.0)) {}

  int source() const { return n; }
  int sink() const { return n + 1; }

  void add(int from, int to, double c) { cap[from][to] += c; }

  double max_flow() {
    std::vector<std::vector<double>> residual = cap;
    const int total = n + 2;
    double flow = 0.0;
    while (true) {
      std::vector<int> parent(total, -1);
      parent[source()] = source();
      std::vector<int> queue = {source()};
      for (std::size_t head = 0; head < queue.size() && parent[sink()] < 0; ++head) {
        const int u = queue[head];
        for (int v = 0; v < total; ++v) {
          if (parent[v] < 0 && residual[u][v] > 0.0) {
            parent[v] = u;
            queue.push_back(v);
          }
        }
      }
      if (parent[sink()] < 0) return flow;
      double bottleneck = std::numeric_limits<double>::infinity();
      for (int v = sink(); v != source(); v = parent[v]) bottleneck = std::min(bottleneck, residual[parent[v]][v]);
      for (int v = sink(); v != source(); v = parent[v]) {
        residual[parent[v]][v] -= bottleneck;
        residual[v][parent[v]] += bottleneck;
      }
      flow += bottleneck;
    }
  }
};

// Direct reading of the labeling cost: per-site assignment costs, pairwise
// penalties on key disagreement, and a charge per label class whose labels
// anyone uses.
inline double labeling_cost(const coprep::LabelingProblem& problem, const std::vector<int>& labels) {
  double cost = 0.0;
  for (int i = 0; i < problem.num_sites(); ++i) cost += problem.unary(i, labels[i]);
  if (cost >= coprep::kInfCost / 2) return coprep::kInfCost;
  for (const auto& pair : problem.pairs) {
    if (problem.potts_key[labels[pair.a]] != problem.potts_key[labels[pair.b]]) cost += pair.weight;
  }
  for (const auto& cls : problem.classes) {
    const std::set<int> members(cls.labels.begin(), cls.labels.end());
    bool used = false;
    for (int i = 0; i < problem.num_sites() && !used; ++i) used = members.count(labels[i]) > 0;
    if (used) cost += cls.cost;
  }
  return cost;
}

// Exact minimizer by enumerating every assignment. Returns the labeling and
// its cost; only usable for a handful of sites.
inline std::pair<std::vector<int>, double> exhaustive_minimum(const coprep::LabelingProblem& problem) {
  std::vector<int> labels(problem.num_sites(), 0);
  std::vector<int> best = labels;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    const double cost = labeling_cost(problem, labels);
    if (cost < best_cost) {
      best_cost = cost;
      best = labels;
    }
    int site = 0;
    while (site < problem.num_sites() && ++labels[site] == problem.num_labels()) labels[site++] = 0;
    if (site == problem.num_sites()) break;
  }
  return {best, best_cost};
}

// Double-loop reading of the rewarp distortion: project frame points through
// both rectifications, fit the least-squares affinity between the two clouds
// via explicit normal equations, pull each detected point back through that
// affinity and the annotated rectification, and take the RMS distance to the
// original image points.
inline double rewarp_rms(const coprep::SceneData& data, const std::vector<int>& members,
                         const coprep::Mat3d& detected, const coprep::Mat3d& annotated) {
  using coprep::HomPoint;
  using coprep::Vec2d;
  using coprep::Vec3d;
  std::vector<Vec2d> ann, det, img;
  for (int i : members) {
    for (const HomPoint& p : data.keypoints[i].frame) {
      const Vec3d a = annotated * p;
      const Vec3d d = detected * p;
      ann.emplace_back(a.x() / a.z(), a.y() / a.z());
      det.emplace_back(d.x() / d.z(), d.y() / d.z());
      img.emplace_back(p.x() / p.z(), p.y() / p.z());
    }
  }

  Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
  Eigen::Matrix<double, 3, 2> xty = Eigen::Matrix<double, 3, 2>::Zero();
  for (std::size_t k = 0; k < ann.size(); ++k) {
    const Vec3d row(ann[k].x(), ann[k].y(), 1.0);
    xtx += row * row.transpose();
    xty += row * det[k].transpose();
  }
  const Eigen::Matrix<double, 3, 2> sol = xtx.ldlt().solve(xty);
  Eigen::Matrix2d lin;
  lin << sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1);
  const Vec2d off(sol(2, 0), sol(2, 1));

  const Eigen::Matrix2d lin_inv = lin.inverse();
  const coprep::Mat3d ann_inv = annotated.inverse();
  double sum = 0.0;
  for (std::size_t k = 0; k < det.size(); ++k) {
    const Vec2d back = lin_inv * (det[k] - off);
    const Vec3d r = ann_inv * Vec3d(back.x(), back.y(), 1.0);
    const Vec2d rew(r.x() / r.z(), r.y() / r.z());
    sum += (rew - img[k]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(det.size()));
}

// Minimal XML well-formedness check for the SVG writers: tags balance, no
// stray '<' or '>', attributes stay inside tags.
inline bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '>') return false;
    if (text[i] != '<') {
      ++i;
      continue;
    }
    const std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    if (tag.empty()) return false;
    if (tag.front() == '?' || tag.front() == '!') {
      i = end + 1;
      continue;
    }
    const bool closing = tag.front() == '/';
    const bool self_closing = tag.back() == '/';
    if (closing) tag = tag.substr(1);
    std::string name;
    for (char c : tag) {
      if (std::isspace(static_cast<unsigned char>(c))) break;
      if (c == '/') break;
      name += c;
    }
    if (name.empty()) return false;
    if (closing) {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (!self_closing) {
      stack.push_back(name);
    }
    i = end + 1;
  }
  return stack.empty();
}

}  // namespace oracle
