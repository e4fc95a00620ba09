#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isotree {

using NodeId = std::size_t;

// Inside an Arborescence every non-root node owns exactly one incoming edge,
// so edges are identified by their head (child) node: EdgeId e names the
// edge (parent(e), e). EdgeId 0 is never a valid edge.
using EdgeId = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised when an input graph is not a directed tree or carries invalid
/// penalty weights.
class MalformedInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Directed edge (tail -> head) with penalty weights. The edge contributes
/// lambda * (x_tail - x_head)_+ + mu * (x_head - x_tail)_+ to the objective;
/// either weight may be +inf, which turns the corresponding side into a hard
/// order constraint.
struct Edge {
  NodeId tail = 0;
  NodeId head = 0;
  double lambda = 0.0;
  double mu = 0.0;
};

/// Arbitrary directed tree over nodes 0..node_count-1.
struct DirectedTree {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
};

/// Throws MalformedInstance unless `tree` is connected, acyclic, free of
/// self-loops and parallel edges, and all weights are nonnegative (or +inf).
void validate(const DirectedTree& tree);

/// Rooted tree whose labels satisfy parent(v) < v for every v >= 1, so the
/// prefix {0, ..., m-1} always induces a subtree and node m is a leaf of the
/// prefix {0, ..., m}.
class Arborescence {
 public:
  static constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

  Arborescence() = default;

  /// Builds an arborescence directly from a parent array (parent[0] is
  /// ignored). Requires parent[v] < v. Every edge is recorded as unflipped
  /// and labels map to themselves.
  static Arborescence from_parents(std::vector<NodeId> parent,
                                   std::vector<double> lambda,
                                   std::vector<double> mu);

  std::size_t node_count() const { return parent_.size(); }
  std::size_t edge_count() const { return node_count() == 0 ? 0 : node_count() - 1; }

  NodeId parent(NodeId v) const { return parent_[v]; }
  double lambda(EdgeId e) const { return lambda_[e]; }
  double mu(EdgeId e) const { return mu_[e]; }
  Edge edge(EdgeId e) const { return {parent_[e], e, lambda_[e], mu_[e]}; }

  /// Children in increasing label order.
  std::span<const NodeId> children(NodeId v) const {
    return {child_list_.data() + child_begin_[v], child_list_.data() + child_begin_[v + 1]};
  }

  /// Input node carried by internal node v.
  NodeId original_label(NodeId v) const { return original_label_[v]; }
  /// Internal node carrying input node `input`.
  NodeId internal_id(NodeId input) const { return internal_id_[input]; }
  /// Index of the input edge that internal edge e was built from.
  std::size_t input_edge(EdgeId e) const { return input_edge_[e]; }
  /// True when internal edge e points opposite to its input edge; its
  /// (lambda, mu) are then the input's (mu, lambda).
  bool flipped(EdgeId e) const { return flipped_[e]; }

  /// All edges (parent(e), e), e = 1..n-1, in EdgeId order.
  std::vector<Edge> edges() const;

 private:
  friend Arborescence normalize(const DirectedTree& input, std::optional<NodeId> root);

  void build_children();

  std::vector<NodeId> parent_;
  std::vector<double> lambda_;
  std::vector<double> mu_;
  std::vector<NodeId> original_label_;
  std::vector<NodeId> internal_id_;
  std::vector<std::size_t> input_edge_;
  std::vector<bool> flipped_;
  std::vector<std::size_t> child_begin_;
  std::vector<NodeId> child_list_;
};

/// Default root: the unique node of zero in-degree if there is one, else
/// the smallest node id.
NodeId default_root(const DirectedTree& tree);

/// Reorients `input` away from `root` (swapping lambda and mu on reversed
/// edges) and relabels nodes in breadth-first order, visiting neighbours by
/// increasing input id.
Arborescence normalize(const DirectedTree& input, std::optional<NodeId> root = std::nullopt);

/// Attachment of leaf `node` to `parent` when growing the prefix
/// {0..node-1} to {0..node}.
struct Attachment {
  NodeId node = 0;
  NodeId parent = 0;
  double lambda = 0.0;
  double mu = 0.0;
};

std::vector<Attachment> decompose(const Arborescence& tree);

/// Connected subgraph of a prefix of an arborescence.
struct Subtree {
  std::vector<NodeId> nodes;   // discovery order, nodes[0] is the seed
  std::vector<EdgeId> edges;
  std::vector<bool> member;    // indexed by node, sized to the prefix

  bool contains(NodeId v) const { return v < member.size() && member[v]; }
};

/// Component containing `seed` of the graph on {0..prefix-1} whose edges are
/// those e < prefix with is_equal(e).
template <class IsEqual>
Subtree component_of(const Arborescence& tree, std::size_t prefix, IsEqual&& is_equal,
                     NodeId seed) {
  Subtree out;
  out.member.assign(prefix, false);
  out.member[seed] = true;
  out.nodes.push_back(seed);
  for (std::size_t head = 0; head < out.nodes.size(); ++head) {
    const NodeId v = out.nodes[head];
    if (v != 0) {
      const NodeId p = tree.parent(v);
      if (!out.member[p] && is_equal(static_cast<EdgeId>(v))) {
        out.member[p] = true;
        out.nodes.push_back(p);
        out.edges.push_back(v);
      }
    }
    for (NodeId c : tree.children(v)) {
      if (c >= prefix) break;
      if (!out.member[c] && is_equal(static_cast<EdgeId>(c))) {
        out.member[c] = true;
        out.nodes.push_back(c);
        out.edges.push_back(c);
      }
    }
  }
  return out;
}

/// A subtree re-rooted at a chosen ancestor. For k >= 1, order[k] is joined
/// to order[up[k]] (closer to the ancestor) by edge link[k]; orientation[k]
/// is +1 when order[k] is the tail of that edge and -1 when it is the head.
struct RootedSubtree {
  std::vector<NodeId> order;
  std::vector<std::size_t> up;
  std::vector<EdgeId> link;
  std::vector<int> orientation;
};

RootedSubtree root_at(const Arborescence& tree, const Subtree& subtree, NodeId ancestor);

struct EdgeValue {
  EdgeId edge = 0;
  double value = 0.0;
};

/// Solves the flow-balance system
///   sum_{out-edges of v} z - sum_{in-edges of v} z = b[v]   for v in B, v != ancestor
/// over the edges of B. `b` is indexed by node id. One pass over the
/// subtree accumulating child sums. Throws std::invalid_argument if
/// `ancestor` is not in B.
std::vector<EdgeValue> tree_linear_solve(const Arborescence& tree, const Subtree& subtree,
                                         NodeId ancestor, std::span<const double> b);

}  // namespace isotree
