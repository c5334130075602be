#include "coprep/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "coprep/error.hpp"

namespace coprep {

MaxFlow::MaxFlow(int expected_nodes, int expected_edges) {
  nodes_.reserve(expected_nodes);
  arcs_.reserve(2 * expected_edges);
  tr_source_.reserve(expected_nodes);
  tr_sink_.reserve(expected_nodes);
}

int MaxFlow::add_node() {
  nodes_.push_back(Node{});
  tr_source_.push_back(0.0);
  tr_sink_.push_back(0.0);
  return static_cast<int>(nodes_.size()) - 1;
}

int MaxFlow::add_nodes(int count) {
  const int first = static_cast<int>(nodes_.size());
  for (int i = 0; i < count; ++i) add_node();
  return first;
}

void MaxFlow::add_tweights(int i, double cap_source, double cap_sink) {
  if (cap_source < 0.0 || cap_sink < 0.0) throw Error("terminal capacity must be nonnegative");
  tr_source_[i] += cap_source;
  tr_sink_[i] += cap_sink;
}

void MaxFlow::add_edge(int i, int j, double cap, double rev_cap) {
  if (cap < 0.0 || rev_cap < 0.0) throw Error("edge capacity must be nonnegative");
  if (i == j) throw Error("self-loop edge");
  const int a = static_cast<int>(arcs_.size());
  arcs_.push_back({j, nodes_[i].first_arc, cap});
  nodes_[i].first_arc = a;
  arcs_.push_back({i, nodes_[j].first_arc, rev_cap});
  nodes_[j].first_arc = a + 1;
  orig_caps_.push_back(cap);
  orig_caps_.push_back(rev_cap);
}

void MaxFlow::set_active(int i) {
  if (!nodes_[i].active) {
    nodes_[i].active = true;
    active_.push_back(i);
  }
}

int MaxFlow::grow() {
  while (active_head_ < active_.size()) {
    const int i = active_[active_head_];
    if (!nodes_[i].active || nodes_[i].tree == Tree::Free) {
      nodes_[i].active = false;
      ++active_head_;
      continue;
    }
    const bool src = nodes_[i].tree == Tree::Source;
    for (int a = nodes_[i].first_arc; a != -1; a = arcs_[a].next) {
      const double res = src ? arcs_[a].rcap : arcs_[sister(a)].rcap;
      if (!(res > 0.0)) continue;
      const int j = arcs_[a].head;
      if (nodes_[j].tree == Tree::Free) {
        nodes_[j].tree = nodes_[i].tree;
        nodes_[j].parent_arc = sister(a);
        nodes_[j].ts = nodes_[i].ts;
        nodes_[j].dist = nodes_[i].dist + 1;
        set_active(j);
      } else if (nodes_[j].tree != nodes_[i].tree) {
        // Connecting arc is always reported in source->sink direction.
        return src ? a : sister(a);
      } else if (nodes_[j].ts <= nodes_[i].ts && nodes_[j].dist > nodes_[i].dist + 1) {
        nodes_[j].parent_arc = sister(a);
        nodes_[j].ts = nodes_[i].ts;
        nodes_[j].dist = nodes_[i].dist + 1;
      }
    }
    nodes_[i].active = false;
    ++active_head_;
  }
  return -1;
}

void MaxFlow::augment(int a) {
  double b = arcs_[a].rcap;
  int i = arcs_[sister(a)].head;
  while (nodes_[i].parent_arc != kTerminal) {
    const int pa = nodes_[i].parent_arc;
    b = std::min(b, arcs_[sister(pa)].rcap);
    i = arcs_[pa].head;
  }
  b = std::min(b, nodes_[i].tr_cap);
  i = arcs_[a].head;
  while (nodes_[i].parent_arc != kTerminal) {
    const int pa = nodes_[i].parent_arc;
    b = std::min(b, arcs_[pa].rcap);
    i = arcs_[pa].head;
  }
  b = std::min(b, -nodes_[i].tr_cap);

  arcs_[a].rcap -= b;
  arcs_[sister(a)].rcap += b;

  i = arcs_[sister(a)].head;
  while (nodes_[i].parent_arc != kTerminal) {
    const int pa = nodes_[i].parent_arc;
    arcs_[pa].rcap += b;
    arcs_[sister(pa)].rcap -= b;
    const int next = arcs_[pa].head;
    if (!(arcs_[sister(pa)].rcap > 0.0)) {
      nodes_[i].parent_arc = kOrphan;
      orphans_.push_back(i);
    }
    i = next;
  }
  nodes_[i].tr_cap -= b;
  if (!(nodes_[i].tr_cap > 0.0)) {
    nodes_[i].parent_arc = kOrphan;
    orphans_.push_back(i);
  }

  i = arcs_[a].head;
  while (nodes_[i].parent_arc != kTerminal) {
    const int pa = nodes_[i].parent_arc;
    arcs_[sister(pa)].rcap += b;
    arcs_[pa].rcap -= b;
    const int next = arcs_[pa].head;
    if (!(arcs_[pa].rcap > 0.0)) {
      nodes_[i].parent_arc = kOrphan;
      orphans_.push_back(i);
    }
    i = next;
  }
  nodes_[i].tr_cap += b;
  if (!(nodes_[i].tr_cap < 0.0)) {
    nodes_[i].parent_arc = kOrphan;
    orphans_.push_back(i);
  }

  flow_ += b;
}

bool MaxFlow::has_valid_origin(int start) {
  int i = start;
  int d = 0;
  while (true) {
    if (nodes_[i].ts == time_) {
      d += nodes_[i].dist;
      break;
    }
    const int pa = nodes_[i].parent_arc;
    if (pa == kTerminal) {
      nodes_[i].ts = time_;
      nodes_[i].dist = 1;
      d += 1;
      break;
    }
    if (pa < 0) return false;  // orphan or free along the chain
    i = arcs_[pa].head;
    ++d;
  }
  i = start;
  int dd = d;
  while (nodes_[i].ts != time_) {
    nodes_[i].ts = time_;
    nodes_[i].dist = dd--;
    i = arcs_[nodes_[i].parent_arc].head;
  }
  return true;
}

void MaxFlow::adopt() {
  for (std::size_t idx = 0; idx < orphans_.size(); ++idx) {
    const int i = orphans_[idx];
    if (nodes_[i].parent_arc != kOrphan) continue;
    const bool src = nodes_[i].tree == Tree::Source;
    int best_arc = -1;
    int best_dist = std::numeric_limits<int>::max();
    for (int a = nodes_[i].first_arc; a != -1; a = arcs_[a].next) {
      const double res = src ? arcs_[sister(a)].rcap : arcs_[a].rcap;
      if (!(res > 0.0)) continue;
      const int j = arcs_[a].head;
      if (nodes_[j].tree != nodes_[i].tree) continue;
      if (!has_valid_origin(j)) continue;
      if (nodes_[j].dist < best_dist) {
        best_dist = nodes_[j].dist;
        best_arc = a;
      }
    }
    if (best_arc != -1) {
      nodes_[i].parent_arc = best_arc;
      nodes_[i].ts = time_;
      nodes_[i].dist = best_dist + 1;
      continue;
    }
    for (int a = nodes_[i].first_arc; a != -1; a = arcs_[a].next) {
      const int j = arcs_[a].head;
      if (nodes_[j].tree != nodes_[i].tree) continue;
      const double res = src ? arcs_[sister(a)].rcap : arcs_[a].rcap;
      if (res > 0.0) set_active(j);
      const int pa = nodes_[j].parent_arc;
      if (pa >= 0 && arcs_[pa].head == i) {
        nodes_[j].parent_arc = kOrphan;
        orphans_.push_back(j);
      }
    }
    nodes_[i].tree = Tree::Free;
    nodes_[i].parent_arc = kNoParent;
    nodes_[i].active = false;
  }
  orphans_.clear();
}

double MaxFlow::solve() {
  if (solved_) return flow_;
  for (int i = 0; i < num_nodes(); ++i) {
    const double net = tr_source_[i] - tr_sink_[i];
    flow_ += std::min(tr_source_[i], tr_sink_[i]);
    nodes_[i].tr_cap = net;
    if (net > 0.0) {
      nodes_[i].tree = Tree::Source;
      nodes_[i].parent_arc = kTerminal;
      nodes_[i].dist = 1;
      set_active(i);
    } else if (net < 0.0) {
      nodes_[i].tree = Tree::Sink;
      nodes_[i].parent_arc = kTerminal;
      nodes_[i].dist = 1;
      set_active(i);
    }
  }
  while (true) {
    const int a = grow();
    if (a < 0) break;
    ++time_;
    augment(a);
    adopt();
  }
  solved_ = true;
  return flow_;
}

bool MaxFlow::source_side(int i) const { return nodes_[i].tree == Tree::Source; }

double MaxFlow::cut_value() const {
  double cut = 0.0;
  for (int i = 0; i < num_nodes(); ++i) {
    cut += source_side(i) ? tr_sink_[i] : tr_source_[i];
  }
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    const int v = arcs_[a].head;
    const int u = arcs_[sister(static_cast<int>(a))].head;
    if (source_side(u) && !source_side(v)) cut += orig_caps_[a];
  }
  return cut;
}

}  // namespace coprep
