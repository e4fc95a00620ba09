#include "isotree/oracle.hpp"

#include <cmath>
#include <string>

namespace isotree {
namespace {

// Equality components as a label per node.
std::vector<std::size_t> label_components(const Arborescence& tree, const SignPattern& pattern,
                                          std::size_t* count) {
  const std::size_t n = tree.node_count();
  std::vector<std::size_t> label(n, 0);
  // Labels follow the root-to-leaf order: a node joins its parent's component
  // through an equality edge, else opens a new one.
  std::size_t next = 0;
  for (NodeId v = 0; v < n; ++v) {
    label[v] = (v != 0 && pattern.is_equal(v)) ? label[tree.parent(v)] : next++;
  }
  if (count) *count = next;
  return label;
}

// Net dual carried by strict edges at each node: out-flow minus in-flow.
std::vector<double> strict_flow(const Arborescence& tree, const SignPattern& pattern) {
  std::vector<double> flow(tree.node_count(), 0.0);
  for (EdgeId e = 1; e < tree.node_count(); ++e) {
    double z = 0.0;
    if (pattern.sign[e] == Sign::kGreater) {
      z = -tree.lambda(e);
    } else if (pattern.sign[e] == Sign::kLess) {
      z = tree.mu(e);
    } else {
      continue;
    }
    flow[tree.parent(e)] += z;
    flow[e] -= z;
  }
  return flow;
}

}  // namespace

bool feasible(const Arborescence& tree, const SignPattern& pattern) {
  for (EdgeId e = 1; e < tree.node_count(); ++e) {
    if (pattern.sign[e] == Sign::kGreater && std::isinf(tree.lambda(e))) return false;
    if (pattern.sign[e] == Sign::kLess && std::isinf(tree.mu(e))) return false;
  }
  return true;
}

ReducedSolution solve_reduced(const Problem& problem, const SignPattern& pattern) {
  const Arborescence& tree = problem.tree;
  std::size_t count = 0;
  const std::vector<std::size_t> label = label_components(tree, pattern, &count);
  // The strict-edge penalties are linear: node v gains slope -flow[v].
  const std::vector<double> flow = strict_flow(tree, pattern);
  std::vector<LossGroup> groups(count);
  for (NodeId v = 0; v < tree.node_count(); ++v) {
    groups[label[v]].add(problem.losses[v].shifted(-flow[v]));
  }
  ReducedSolution out;
  out.x.resize(tree.node_count());
  std::vector<double> value(count);
  for (std::size_t k = 0; k < count; ++k) value[k] = groups[k].inverse_derivative(0.0);
  for (NodeId v = 0; v < tree.node_count(); ++v) out.x[v] = value[label[v]];
  const std::vector<Edge> edges = tree.edges();
  out.objective = objective(problem.losses, edges, out.x);
  return out;
}

std::vector<double> reconstruct_duals(const Problem& problem, const SignPattern& pattern,
                                      std::span<const double> x) {
  const Arborescence& tree = problem.tree;
  const std::size_t n = tree.node_count();
  std::vector<double> z(n, 0.0);
  for (EdgeId e = 1; e < n; ++e) {
    if (pattern.sign[e] == Sign::kGreater) z[e] = -tree.lambda(e);
    if (pattern.sign[e] == Sign::kLess) z[e] = tree.mu(e);
  }
  const std::vector<double> flow = strict_flow(tree, pattern);
  std::vector<double> b(n);
  for (NodeId v = 0; v < n; ++v) b[v] = problem.losses[v].derivative(x[v]) - flow[v];

  std::vector<bool> done(n, false);
  for (NodeId seed = 0; seed < n; ++seed) {
    if (done[seed]) continue;
    const Subtree component = component_of(
        tree, n, [&](EdgeId e) { return pattern.is_equal(e); }, seed);
    for (NodeId v : component.nodes) done[v] = true;
    for (const EdgeValue& ev : tree_linear_solve(tree, component, seed, b)) z[ev.edge] = ev.value;
  }
  return z;
}

OracleSolution enumerate(const Problem& problem, double kkt_tol) {
  problem.validate();
  const Arborescence& tree = problem.tree;
  const std::size_t edges = tree.edge_count();
  if (edges > kMaxOracleEdges) {
    throw OracleCapExceeded("enumeration is capped at " + std::to_string(kMaxOracleEdges) +
                            " edges, instance has " + std::to_string(edges));
  }
  const std::size_t n = tree.node_count();
  SignPattern pattern;
  pattern.sign.assign(n, Sign::kLess);
  std::size_t tried = 0;
  while (true) {
    if (feasible(tree, pattern)) {
      ++tried;
      const ReducedSolution reduced = solve_reduced(problem, pattern);
      std::vector<double> z = reconstruct_duals(problem, pattern, reduced.x);
      if (kkt_residual(problem, reduced.x, z) <= kkt_tol) {
        return {reduced.x, std::move(z), pattern, tried};
      }
    }
    // Odometer step; the last edge varies fastest.
    EdgeId e = n;
    while (e-- > 1) {
      auto& s = pattern.sign[e];
      if (s == Sign::kGreater) {
        s = Sign::kLess;
        continue;
      }
      s = s == Sign::kLess ? Sign::kEqual : Sign::kGreater;
      break;
    }
    if (e == 0) break;
  }
  throw OracleFailure("no sign pattern passed the KKT screen after " + std::to_string(tried) +
                      " candidates");
}

TreeOracleSolution enumerate(const DirectedTree& tree, std::span<const Loss> losses,
                             std::optional<NodeId> root, double kkt_tol) {
  const Problem problem = make_problem(tree, losses, root);
  const OracleSolution internal = enumerate(problem, kkt_tol);
  TreeOracleSolution out;
  out.patterns_tried = internal.patterns_tried;
  out.x.assign(tree.node_count, 0.0);
  out.z.assign(tree.edges.size(), 0.0);
  out.pattern.assign(tree.edges.size(), Sign::kEqual);
  for (NodeId v = 0; v < problem.tree.node_count(); ++v) {
    out.x[problem.tree.original_label(v)] = internal.x[v];
  }
  for (EdgeId e = 1; e < problem.tree.node_count(); ++e) {
    const std::size_t k = problem.tree.input_edge(e);
    const bool flip = problem.tree.flipped(e);
    out.z[k] = flip ? -internal.z[e] : internal.z[e];
    Sign s = internal.pattern.sign[e];
    if (flip && s != Sign::kEqual) s = s == Sign::kLess ? Sign::kGreater : Sign::kLess;
    out.pattern[k] = s;
  }
  return out;
}

std::vector<double> pava(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) throw std::invalid_argument("pava: y and w differ in length");
  struct Block {
    double weight;
    double weighted_sum;
    std::size_t length;
    double mean() const { return weighted_sum / weight; }
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({w[i], w[i] * y[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().weight += top.weight;
      blocks.back().weighted_sum += top.weighted_sum;
      blocks.back().length += top.length;
    }
  }
  std::vector<double> x;
  x.reserve(y.size());
  for (const Block& b : blocks) x.insert(x.end(), b.length, b.mean());
  return x;
}

}  // namespace isotree
