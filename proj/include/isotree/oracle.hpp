#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "isotree/solver.hpp"

namespace isotree {

// Reference solvers used to cross-check the recursive solver on desk-scale
// instances. Nothing here is meant to scale.

/// Sign for every edge of a whole tree (entry 0 unused).
using SignPattern = ActiveSet;

inline constexpr std::size_t kMaxOracleEdges = 12;

class OracleCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// No sign pattern produced a certified pair. Cannot happen for a valid
/// instance unless tolerances break down.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pattern is feasible when no edge with lambda = inf is kGreater and no
/// edge with mu = inf is kLess.
bool feasible(const Arborescence& tree, const SignPattern& pattern);

struct ReducedSolution {
  std::vector<double> x;
  double objective = 0.0;  // full objective evaluated at x
};

/// Minimizer of the problem with strict edges replaced by their linear
/// penalties and equality edges enforced as constraints. Each equality
/// component pools its shifted losses into one scalar equation. The result
/// may contradict the pattern's strict signs.
ReducedSolution solve_reduced(const Problem& problem, const SignPattern& pattern);

/// Duals that pair with x under `pattern`: strict edges pinned to their
/// forced endpoint, equality edges from the flow balance of their component.
std::vector<double> reconstruct_duals(const Problem& problem, const SignPattern& pattern,
                                      std::span<const double> x);

struct OracleSolution {
  std::vector<double> x;
  std::vector<double> z;  // by EdgeId, z[0] unused
  SignPattern pattern;
  std::size_t patterns_tried = 0;
};

/// Walks feasible sign patterns in lexicographic order (kLess < kEqual <
/// kGreater, lowest EdgeId most significant) and returns the first whose
/// reduced minimizer and reconstructed duals have KKT residual <= kkt_tol.
/// Throws OracleCapExceeded above kMaxOracleEdges edges.
OracleSolution enumerate(const Problem& problem, double kkt_tol = 1e-8);

/// enumerate() on an arbitrary directed tree; x, z and the pattern are
/// reported in input labels and orientation (pattern indexed by input edge).
struct TreeOracleSolution {
  std::vector<double> x;
  std::vector<double> z;
  std::vector<Sign> pattern;
  std::size_t patterns_tried = 0;
};

TreeOracleSolution enumerate(const DirectedTree& tree, std::span<const Loss> losses,
                             std::optional<NodeId> root = std::nullopt, double kkt_tol = 1e-8);

/// Weighted least-squares isotonic fit x_1 <= ... <= x_n by pooling adjacent
/// violators.
std::vector<double> pava(std::span<const double> y, std::span<const double> w);

}  // namespace isotree
