#include <algorithm>
#include <cmath>

#include "isotree/solver.hpp"

namespace isotree {
namespace {

double forced_gap(double z, double endpoint) {
  if (std::isinf(endpoint)) return kInfinity;
  return std::abs(z - endpoint);
}

double box_gap(double z, double lambda, double mu) {
  if (z < -lambda) return -lambda - z;
  if (z > mu) return z - mu;
  return 0.0;
}

}  // namespace

double kkt_residual(std::span<const Loss> losses, std::span<const Edge> edges,
                    std::span<const double> x, std::span<const double> z, double equal_tol) {
  if (equal_tol < 0.0) equal_tol = equal_tolerance(x);
  std::vector<double> balance(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) balance[i] = -losses[i].derivative(x[i]);
  double edge_violation = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    balance[e.tail] += z[k];
    balance[e.head] -= z[k];
    double v = box_gap(z[k], e.lambda, e.mu);
    const double diff = x[e.tail] - x[e.head];
    if (diff > equal_tol) {
      v += forced_gap(z[k], -e.lambda);
    } else if (diff < -equal_tol) {
      v += forced_gap(z[k], e.mu);
    }
    edge_violation = std::max(edge_violation, v);
  }
  double node_violation = 0.0;
  for (double b : balance) node_violation = std::max(node_violation, std::abs(b));
  return node_violation + edge_violation;
}

double kkt_residual(const Problem& problem, std::span<const double> x,
                    std::span<const double> z, double equal_tol) {
  const std::vector<Edge> edges = problem.tree.edges();
  return kkt_residual(problem.losses, edges, x, z.subspan(1), equal_tol);
}

double objective(std::span<const Loss> losses, std::span<const Edge> edges,
                 std::span<const double> x, double equal_tol) {
  if (equal_tol < 0.0) equal_tol = equal_tolerance(x);
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += losses[i].value(x[i]);
  auto penalty = [&](double weight, double excess) {
    if (excess <= 0.0) return 0.0;
    if (std::isinf(weight)) return excess <= equal_tol ? 0.0 : kInfinity;
    return weight * excess;
  };
  for (const Edge& e : edges) {
    const double diff = x[e.tail] - x[e.head];
    total += penalty(e.lambda, diff) + penalty(e.mu, -diff);
  }
  return total;
}

}  // namespace isotree
