#pragma once

#include <vector>

namespace coprep {

// s-t max-flow by augmenting paths with two search trees grown from the
// terminals and reused across augmentations. Terminal capacities are folded
// into one per-node residual (positive: source arc, negative: sink arc).
class MaxFlow {
 public:
  explicit MaxFlow(int expected_nodes = 0, int expected_edges = 0);

  int add_node();
  int add_nodes(int count);

  // Accumulates capacities source->i and i->sink.
  void add_tweights(int i, double cap_source, double cap_sink);

  // Adds the arc pair i->j (cap) and j->i (rev_cap). Both nonnegative.
  void add_edge(int i, int j, double cap, double rev_cap);

  // Returns the max-flow value; afterward source_side describes a min cut.
  double solve();

  // Nodes never reached by the source tree (including free nodes) land on
  // the sink side.
  bool source_side(int i) const;

  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  // Total capacity of the cut induced by source_side; equals the flow value
  // up to floating-point roundoff.
  double cut_value() const;

 private:
  enum class Tree : unsigned char { Free, Source, Sink };
  struct Node {
    int first_arc = -1;
    int parent_arc = kNoParent;  // arc from this node toward its parent
    int ts = 0;
    int dist = 0;
    double tr_cap = 0.0;
    Tree tree = Tree::Free;
    bool active = false;
  };
  struct Arc {
    int head;
    int next;
    double rcap;
  };

  static constexpr int kNoParent = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;

  static int sister(int a) { return a ^ 1; }
  void set_active(int i);
  int grow();  // returns a connecting arc (source-tree tail) or -1
  void augment(int connecting_arc);
  void adopt();
  bool has_valid_origin(int i);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<double> orig_caps_;  // arc capacities as given, for cut_value
  std::vector<double> tr_source_;  // accumulated source->i capacity
  std::vector<double> tr_sink_;    // accumulated i->sink capacity
  std::vector<int> active_;
  std::size_t active_head_ = 0;
  std::vector<int> orphans_;
  double flow_ = 0.0;
  int time_ = 0;
  bool solved_ = false;
};

}  // namespace coprep
