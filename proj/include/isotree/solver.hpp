#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "isotree/loss.hpp"
#include "isotree/tree.hpp"

namespace isotree {

/// Raised when a proven property of the recursion fails at run time (too
/// many inner iterations, a non-monotone parameter path, ...). Signals a bug
/// or a tolerance breakdown, never bad input.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a primal-dual pair cannot be certified: an order relation
/// forbidden by an infinite weight, or a KKT residual above tolerance.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance on an arborescence: one loss per node, indexed by internal id.
struct Problem {
  Arborescence tree;
  std::vector<Loss> losses;

  void validate() const;
};

/// Relation x_tail # x_head on an edge.
enum class Sign : std::uint8_t { kLess, kEqual, kGreater };

char sign_char(Sign s);

/// Sign per edge of a prefix, indexed by EdgeId (entry 0 unused).
struct ActiveSet {
  std::vector<Sign> sign;

  bool is_equal(EdgeId e) const { return sign[e] == Sign::kEqual; }
  /// Edges of the prefix carrying sign `s`, in increasing order.
  std::vector<EdgeId> edges_with(Sign s) const;
};

/// Sign of each edge of the prefix {0..prefix-1} read off x. An edge is
/// kEqual when |x_tail - x_head| <= equal_tol. Throws CertificateError when x
/// demands a sign ruled out by an infinite weight.
ActiveSet build_initial_active_set(const Arborescence& tree, std::size_t prefix,
                                   std::span<const double> x, double equal_tol);

/// Point (t, x*(t), z*(t)) on the parametric path together with a compatible
/// active set. For the attachment of node m: x covers nodes 0..m, z and
/// active cover edges 1..m-1 (z[0] unused).
struct PrimalDualState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> z;
  ActiveSet active;
};

/// The equality component B containing the attachment parent, rooted there,
/// with the aggregates that make its primal and dual values explicit
/// functions of t:
///   x_B(t) = group^{-1}(t + beta)
///   z_e(t) = orientation * (subtree_group[k]'(x_B(t)) - alpha[k])
/// for the edge e = rooted.link[k] joining the subtree below order[k].
struct ComponentView {
  NodeId anchor = 0;
  Subtree component;
  RootedSubtree rooted;
  double beta = 0.0;
  std::vector<double> alpha;              // aligned with rooted.order
  std::vector<LossGroup> subtree_group;   // aligned with rooted.order
  std::vector<EdgeId> omega_plus;         // boundary edges with the tail in B
  std::vector<EdgeId> omega_minus;        // boundary edges with the head in B
  LossGroup group;

  /// alpha keyed by edge.
  std::vector<EdgeValue> alphas() const;
};

ComponentView build_component_view(const Problem& problem, const PrimalDualState& state,
                                   const Attachment& attach);

/// Common value of the component at parameter t.
double component_value(const ComponentView& view, double t);

/// x^q(t) over nodes 0..attach.node: outside the component frozen at
/// `frozen`, the component at component_value(t), the attached node at
/// (f_attach^*)'(-t).
std::vector<double> primal_at(const ComponentView& view, std::span<const double> frozen,
                              const Loss& attach_loss, NodeId attach_node, double t);

/// Duals on the component's edges at parameter t.
std::vector<EdgeValue> dual_at(const ComponentView& view, double t);

/// Direction of the parameter search: update^- lowers t, update^+ raises it.
enum class Direction : int { kDecrease = -1, kIncrease = +1 };

struct EdgeThreshold {
  EdgeId edge = 0;
  double delta_t = 0.0;   // +-inf when the bound being approached is infinite
  Sign exit_sign = Sign::kEqual;  // sign the edge takes if it leaves the component here
};

/// Largest admissible parameter move from state.t. For kDecrease all values
/// are <= 0 and the aggregates are maxima (empty sets give -inf); for
/// kIncrease they are >= 0, minima, and empty sets give +inf.
struct Thresholds {
  double edges = 0.0;        // over the component's edges
  double omega_plus = 0.0;   // frozen heads of Omega_+ approached by x_B
  double omega_minus = 0.0;  // frozen tails of Omega_- approached by x_B
  double omega = 0.0;
  double step = 0.0;
  std::vector<EdgeThreshold> per_edge;
  std::vector<EdgeId> omega_candidates;  // Omega edges whose frozen end x_B is moving toward
};

Thresholds compute_thresholds(const ComponentView& view, const PrimalDualState& state,
                              const Arborescence& tree, Direction direction);
Thresholds thresholds_minus(const ComponentView& view, const PrimalDualState& state,
                            const Arborescence& tree);
Thresholds thresholds_plus(const ComponentView& view, const PrimalDualState& state,
                           const Arborescence& tree);

struct StepTolerances {
  double equal = 1e-9;  // absolute, already scaled
  double tie = 1e-9;    // relative to 1 + |step|
};

struct StepResult {
  PrimalDualState state;
  std::optional<double> terminal_t;
  bool used_equilibrium = false;
  Thresholds thresholds;
  std::vector<EdgeId> left_equal;    // moved out of the equality set
  std::vector<EdgeId> joined_equal;  // moved into the equality set
};

/// One move of the parametric search from `state` along `direction`; the
/// attachment bound is -attach.lambda (kDecrease) or attach.mu (kIncrease).
StepResult advance(const Problem& problem, const PrimalDualState& state, const ComponentView& view,
                   const Attachment& attach, Direction direction, const StepTolerances& tol);
StepResult step_minus(const Problem& problem, const PrimalDualState& state,
                      const ComponentView& view, const Attachment& attach,
                      const StepTolerances& tol);
StepResult step_plus(const Problem& problem, const PrimalDualState& state,
                     const ComponentView& view, const Attachment& attach,
                     const StepTolerances& tol);

/// Optimal pair of a prefix: x over nodes 0..m-1, z over edges (z[0] unused).
struct PrefixPair {
  std::vector<double> x;
  std::vector<double> z;
};

enum class Branch : std::uint8_t {
  kZero,      // attached node already optimal at the parent's value
  kShortcut,  // the bound on the search side is 0, so t* = 0
  kDecrease,
  kIncrease,
};

struct GenerateStats {
  NodeId node = 0;
  NodeId parent = 0;
  double attach_lambda = 0.0;
  double attach_mu = 0.0;
  double attach_slope = 0.0;  // f'_node at the parent's previous value
  Branch branch = Branch::kZero;
  std::size_t inner_iterations = 0;
  std::size_t equilibrium_calls = 0;
  std::size_t equal_reentries = 0;
  double t_star = 0.0;
  std::vector<double> t_path;  // t_0 = 0, t_1, ..., t*
};

struct SolveOptions {
  double kkt_tolerance = 1e-8;
  double equal_tolerance = 1e-9;  // scaled by 1 + max |x|
  double tie_tolerance = 1e-9;
  /// Called with each prefix optimum, starting from the single root.
  std::function<void(const PrefixPair&)> on_prefix;
};

/// Extends the optimal pair of prefix {0..attach.node-1} to {0..attach.node}.
PrefixPair generate(const Problem& problem, PrefixPair pair, const Attachment& attach,
                    const SolveOptions& options, GenerateStats* stats = nullptr);

struct SolveStats {
  std::vector<GenerateStats> generate;
  std::size_t inner_iterations_total = 0;
  std::size_t equilibrium_calls_total = 0;
  double kkt_residual = 0.0;
};

/// x by node, z by EdgeId (z[0] unused).
struct Solution {
  std::vector<double> x;
  std::vector<double> z;
  SolveStats stats;
};

Solution solve(const Problem& problem, const SolveOptions& options = {});

/// Solution of an arbitrary directed tree, reported in input labels: x by
/// input node, z by input edge index (sign-mapped through flipped edges).
struct TreeSolution {
  std::vector<double> x;
  std::vector<double> z;
  SolveStats stats;
};

Problem make_problem(const DirectedTree& tree, std::span<const Loss> losses,
                     std::optional<NodeId> root = std::nullopt);

TreeSolution solve(const DirectedTree& tree, std::span<const Loss> losses,
                   std::optional<NodeId> root = std::nullopt, const SolveOptions& options = {});

/// Scale-aware equality tolerance: relative * (1 + max |x|).
double equal_tolerance(std::span<const double> x, double relative = 1e-9);

/// KKT violation of (x, z): the largest node flow-balance error plus the
/// largest edge violation (distance of z from [-lambda, mu], plus distance
/// from the forced endpoint when |x_tail - x_head| > equal_tol).
/// z is aligned with `edges`. A negative equal_tol selects equal_tolerance(x).
double kkt_residual(std::span<const Loss> losses, std::span<const Edge> edges,
                    std::span<const double> x, std::span<const double> z,
                    double equal_tol = -1.0);

/// Same, for an arborescence problem with z indexed by EdgeId.
double kkt_residual(const Problem& problem, std::span<const double> x,
                    std::span<const double> z, double equal_tol = -1.0);

/// Objective value sum f_i(x_i) + lambda (x_i - x_j)_+ + mu (x_j - x_i)_+.
/// An infinite weight contributes +inf only when the violated difference
/// exceeds equal_tol.
double objective(std::span<const Loss> losses, std::span<const Edge> edges,
                 std::span<const double> x, double equal_tol = -1.0);

}  // namespace isotree
