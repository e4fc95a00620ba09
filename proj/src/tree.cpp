#include "isotree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace isotree {
namespace {

bool valid_weight(double w) { return w >= 0.0; }  // false for NaN

std::string edge_name(const Edge& e) {
  return "(" + std::to_string(e.tail) + ", " + std::to_string(e.head) + ")";
}

}  // namespace

void validate(const DirectedTree& tree) {
  const std::size_t n = tree.node_count;
  if (n == 0) throw MalformedInstance("tree has no nodes");
  if (tree.edges.size() != n - 1) {
    throw MalformedInstance("a tree on " + std::to_string(n) + " nodes needs " +
                            std::to_string(n - 1) + " edges, got " +
                            std::to_string(tree.edges.size()));
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<NodeId> root(n);
  std::iota(root.begin(), root.end(), NodeId{0});
  auto find = [&](NodeId v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  for (const Edge& e : tree.edges) {
    if (e.tail >= n || e.head >= n) throw MalformedInstance("edge " + edge_name(e) + " references an unknown node");
    if (e.tail == e.head) throw MalformedInstance("self-loop at node " + std::to_string(e.tail));
    if (!valid_weight(e.lambda) || !valid_weight(e.mu)) {
      throw MalformedInstance("edge " + edge_name(e) + " has a negative or NaN weight");
    }
    if (!seen.emplace(std::min(e.tail, e.head), std::max(e.tail, e.head)).second) {
      throw MalformedInstance("parallel edge " + edge_name(e));
    }
    const NodeId a = find(e.tail);
    const NodeId b = find(e.head);
    if (a == b) throw MalformedInstance("edge " + edge_name(e) + " closes a cycle");
    root[a] = b;
  }
  // n-1 edges without a cycle span the whole node set.
}

std::vector<Edge> Arborescence::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (EdgeId e = 1; e < node_count(); ++e) out.push_back(edge(e));
  return out;
}

void Arborescence::build_children() {
  const std::size_t n = parent_.size();
  child_begin_.assign(n + 1, 0);
  for (NodeId v = 1; v < n; ++v) ++child_begin_[parent_[v] + 1];
  for (std::size_t i = 0; i < n; ++i) child_begin_[i + 1] += child_begin_[i];
  child_list_.assign(n == 0 ? 0 : n - 1, 0);
  std::vector<std::size_t> fill(child_begin_.begin(), child_begin_.end() - 1);
  for (NodeId v = 1; v < n; ++v) child_list_[fill[parent_[v]]++] = v;
}

Arborescence Arborescence::from_parents(std::vector<NodeId> parent, std::vector<double> lambda,
                                        std::vector<double> mu) {
  const std::size_t n = parent.size();
  if (n == 0) throw MalformedInstance("tree has no nodes");
  if (lambda.size() != n || mu.size() != n) throw MalformedInstance("weight arrays must match the parent array");
  parent[0] = kNoParent;
  lambda[0] = 0.0;
  mu[0] = 0.0;
  for (NodeId v = 1; v < n; ++v) {
    if (parent[v] >= v) throw MalformedInstance("parent labels must precede their children");
    if (!valid_weight(lambda[v]) || !valid_weight(mu[v])) {
      throw MalformedInstance("negative or NaN weight on edge into node " + std::to_string(v));
    }
  }
  Arborescence arb;
  arb.parent_ = std::move(parent);
  arb.lambda_ = std::move(lambda);
  arb.mu_ = std::move(mu);
  arb.original_label_.resize(n);
  std::iota(arb.original_label_.begin(), arb.original_label_.end(), NodeId{0});
  arb.internal_id_ = arb.original_label_;
  arb.input_edge_.resize(n);
  for (NodeId v = 1; v < n; ++v) arb.input_edge_[v] = v - 1;
  arb.flipped_.assign(n, false);
  arb.build_children();
  return arb;
}

NodeId default_root(const DirectedTree& tree) {
  std::vector<std::size_t> indegree(tree.node_count, 0);
  for (const Edge& e : tree.edges) {
    if (e.head < tree.node_count) ++indegree[e.head];
  }
  std::optional<NodeId> unique;
  for (NodeId v = 0; v < tree.node_count; ++v) {
    if (indegree[v] != 0) continue;
    if (unique) return 0;
    unique = v;
  }
  return unique.value_or(0);
}

Arborescence normalize(const DirectedTree& input, std::optional<NodeId> root) {
  validate(input);
  const std::size_t n = input.node_count;
  const NodeId start = root.value_or(default_root(input));
  if (start >= n) throw MalformedInstance("root " + std::to_string(start) + " is not a node");

  std::vector<std::vector<std::pair<NodeId, std::size_t>>> adjacent(n);
  for (std::size_t k = 0; k < input.edges.size(); ++k) {
    const Edge& e = input.edges[k];
    adjacent[e.tail].emplace_back(e.head, k);
    adjacent[e.head].emplace_back(e.tail, k);
  }
  for (auto& list : adjacent) std::sort(list.begin(), list.end());

  Arborescence arb;
  arb.parent_.assign(n, Arborescence::kNoParent);
  arb.lambda_.assign(n, 0.0);
  arb.mu_.assign(n, 0.0);
  arb.original_label_.assign(n, 0);
  arb.internal_id_.assign(n, Arborescence::kNoParent);
  arb.input_edge_.assign(n, 0);
  arb.flipped_.assign(n, false);

  arb.original_label_[0] = start;
  arb.internal_id_[start] = 0;
  std::size_t next = 1;
  for (NodeId label = 0; label < next; ++label) {
    const NodeId u = arb.original_label_[label];
    for (const auto& [w, k] : adjacent[u]) {
      if (arb.internal_id_[w] != Arborescence::kNoParent) continue;
      const NodeId child = next++;
      arb.internal_id_[w] = child;
      arb.original_label_[child] = w;
      arb.parent_[child] = label;
      arb.input_edge_[child] = k;
      const Edge& e = input.edges[k];
      if (e.tail == u) {
        arb.lambda_[child] = e.lambda;
        arb.mu_[child] = e.mu;
      } else {
        arb.flipped_[child] = true;
        arb.lambda_[child] = e.mu;
        arb.mu_[child] = e.lambda;
      }
    }
  }
  arb.build_children();
  return arb;
}

std::vector<Attachment> decompose(const Arborescence& tree) {
  std::vector<Attachment> out;
  out.reserve(tree.edge_count());
  for (NodeId v = 1; v < tree.node_count(); ++v) {
    out.push_back({v, tree.parent(v), tree.lambda(v), tree.mu(v)});
  }
  return out;
}

RootedSubtree root_at(const Arborescence& tree, const Subtree& subtree, NodeId ancestor) {
  if (!subtree.contains(ancestor)) {
    throw std::invalid_argument("ancestor " + std::to_string(ancestor) + " is not in the subtree");
  }
  RootedSubtree r;
  const std::size_t size = subtree.nodes.size();
  r.order.reserve(size);
  r.up.reserve(size);
  r.link.reserve(size);
  r.orientation.reserve(size);
  r.order.push_back(ancestor);
  r.up.push_back(0);
  r.link.push_back(0);
  r.orientation.push_back(0);
  for (std::size_t k = 0; k < r.order.size(); ++k) {
    const NodeId v = r.order[k];
    const NodeId from = k == 0 ? Arborescence::kNoParent : r.order[r.up[k]];
    if (v != 0) {
      const NodeId p = tree.parent(v);
      if (p != from && subtree.contains(p)) {
        // v is the head of edge v, so p sits at the tail.
        r.order.push_back(p);
        r.up.push_back(k);
        r.link.push_back(v);
        r.orientation.push_back(+1);
      }
    }
    for (NodeId c : tree.children(v)) {
      if (c >= subtree.member.size()) break;
      if (c != from && subtree.member[c]) {
        r.order.push_back(c);
        r.up.push_back(k);
        r.link.push_back(c);
        r.orientation.push_back(-1);
      }
    }
  }
  return r;
}

std::vector<EdgeValue> tree_linear_solve(const Arborescence& tree, const Subtree& subtree,
                                         NodeId ancestor, std::span<const double> b) {
  const RootedSubtree r = root_at(tree, subtree, ancestor);
  std::vector<double> acc(r.order.size(), 0.0);
  for (std::size_t k = 1; k < r.order.size(); ++k) acc[k] = b[r.order[k]];
  std::vector<EdgeValue> out(r.order.size() - 1);
  for (std::size_t k = r.order.size(); k-- > 1;) {
    out[k - 1] = {r.link[k], r.orientation[k] * acc[k]};
    acc[r.up[k]] += acc[k];
  }
  return out;
}

}  // namespace isotree
