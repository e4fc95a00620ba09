#include "isotree/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace isotree {
namespace {

int sign_of(Direction d) { return static_cast<int>(d); }

// Aggregate along the search direction: max when t decreases, min when it increases.
double toward(Direction d, double a, double b) {
  return d == Direction::kDecrease ? std::max(a, b) : std::min(a, b);
}

// Keep a threshold on the admissible side of zero; round-off can put a bound
// that is already active a hair on the wrong side.
double clamp_move(Direction d, double delta) {
  return d == Direction::kDecrease ? std::min(delta, 0.0) : std::max(delta, 0.0);
}

std::string edge_label(const Arborescence& tree, EdgeId e) {
  return "(" + std::to_string(tree.parent(e)) + ", " + std::to_string(e) + ")";
}

}  // namespace

void Problem::validate() const {
  if (tree.node_count() == 0) throw MalformedInstance("problem has no nodes");
  if (losses.size() != tree.node_count()) {
    throw MalformedInstance("expected one loss per node (" + std::to_string(tree.node_count()) +
                            "), got " + std::to_string(losses.size()));
  }
}

char sign_char(Sign s) {
  switch (s) {
    case Sign::kLess: return '<';
    case Sign::kEqual: return '=';
    case Sign::kGreater: return '>';
  }
  return '?';
}

std::vector<EdgeId> ActiveSet::edges_with(Sign s) const {
  std::vector<EdgeId> out;
  for (EdgeId e = 1; e < sign.size(); ++e) {
    if (sign[e] == s) out.push_back(e);
  }
  return out;
}

ActiveSet build_initial_active_set(const Arborescence& tree, std::size_t prefix,
                                   std::span<const double> x, double equal_tol) {
  ActiveSet active;
  active.sign.assign(prefix, Sign::kEqual);
  for (EdgeId e = 1; e < prefix; ++e) {
    const double xi = x[tree.parent(e)];
    const double xj = x[e];
    if (std::abs(xi - xj) <= equal_tol) continue;
    if (xi > xj) {
      if (std::isinf(tree.lambda(e))) {
        throw CertificateError("edge " + edge_label(tree, e) +
                               " has x_tail > x_head but an infinite lambda");
      }
      active.sign[e] = Sign::kGreater;
    } else {
      if (std::isinf(tree.mu(e))) {
        throw CertificateError("edge " + edge_label(tree, e) +
                               " has x_tail < x_head but an infinite mu");
      }
      active.sign[e] = Sign::kLess;
    }
  }
  return active;
}

std::vector<EdgeValue> ComponentView::alphas() const {
  std::vector<EdgeValue> out;
  for (std::size_t k = 1; k < rooted.order.size(); ++k) out.push_back({rooted.link[k], alpha[k]});
  return out;
}

ComponentView build_component_view(const Problem& problem, const PrimalDualState& state,
                                   const Attachment& attach) {
  const Arborescence& tree = problem.tree;
  const std::size_t prefix = attach.node;
  ComponentView view;
  view.anchor = attach.parent;
  view.component = component_of(
      tree, prefix, [&](EdgeId e) { return state.active.is_equal(e); }, attach.parent);
  view.rooted = root_at(tree, view.component, attach.parent);

  const auto& order = view.rooted.order;
  const std::size_t size = order.size();
  view.alpha.assign(size, 0.0);
  view.subtree_group.assign(size, LossGroup{});
  for (std::size_t k = 0; k < size; ++k) {
    const NodeId v = order[k];
    double net = 0.0;  // out-flow minus in-flow over boundary edges at v
    if (v != 0 && !view.component.contains(tree.parent(v))) {
      net -= state.z[v];
      view.omega_minus.push_back(v);
    }
    for (NodeId c : tree.children(v)) {
      if (c >= prefix) break;
      if (!view.component.contains(c)) {
        net += state.z[c];
        view.omega_plus.push_back(c);
      }
    }
    view.alpha[k] = net;
    view.subtree_group[k].add(problem.losses[v]);
  }
  for (std::size_t k = size; k-- > 1;) {
    view.alpha[view.rooted.up[k]] += view.alpha[k];
    view.subtree_group[view.rooted.up[k]].merge(view.subtree_group[k]);
  }
  view.beta = view.alpha[0];
  view.group = view.subtree_group[0];
  return view;
}

double component_value(const ComponentView& view, double t) {
  return view.group.inverse_derivative(t + view.beta);
}

std::vector<double> primal_at(const ComponentView& view, std::span<const double> frozen,
                              const Loss& attach_loss, NodeId attach_node, double t) {
  std::vector<double> x(frozen.begin(), frozen.begin() + attach_node + 1);
  const double value = component_value(view, t);
  for (NodeId v : view.rooted.order) x[v] = value;
  x[attach_node] = attach_loss.inverse_derivative(-t);
  return x;
}

std::vector<EdgeValue> dual_at(const ComponentView& view, double t) {
  const double value = component_value(view, t);
  std::vector<EdgeValue> out;
  out.reserve(view.rooted.order.size());
  for (std::size_t k = 1; k < view.rooted.order.size(); ++k) {
    const double inner = view.subtree_group[k].derivative(value) - view.alpha[k];
    out.push_back({view.rooted.link[k], view.rooted.orientation[k] * inner});
  }
  return out;
}

Thresholds compute_thresholds(const ComponentView& view, const PrimalDualState& state,
                              const Arborescence& tree, Direction direction) {
  const int d = sign_of(direction);
  const double none = d * kInfinity;
  const double tq = state.t;
  auto move_to = [&](double x) {
    return clamp_move(direction, view.group.derivative(x) - view.beta - tq);
  };

  Thresholds th;
  th.edges = none;
  for (std::size_t k = 1; k < view.rooted.order.size(); ++k) {
    const EdgeId e = view.rooted.link[k];
    const int s = view.rooted.orientation[k];
    // z_e moves in direction d * s as t moves in direction d.
    const bool to_lower = d * s < 0;
    const double bound = to_lower ? tree.lambda(e) : tree.mu(e);
    EdgeThreshold et{e, none, to_lower ? Sign::kGreater : Sign::kLess};
    if (!std::isinf(bound)) {
      const double target_z = to_lower ? -bound : bound;
      const double x = view.subtree_group[k].inverse_derivative(view.alpha[k] + s * target_z);
      et.delta_t = move_to(x);
    }
    th.edges = toward(direction, th.edges, et.delta_t);
    th.per_edge.push_back(et);
  }

  // Frozen neighbours lying on the side x_B is moving to.
  const Sign plus_sign = direction == Direction::kDecrease ? Sign::kGreater : Sign::kLess;
  const Sign minus_sign = direction == Direction::kDecrease ? Sign::kLess : Sign::kGreater;
  std::optional<double> plus_target;
  std::optional<double> minus_target;
  for (EdgeId e : view.omega_plus) {
    if (state.active.sign[e] != plus_sign) continue;
    const double v = state.x[e];
    plus_target = plus_target ? toward(direction, *plus_target, v) : v;
    th.omega_candidates.push_back(e);
  }
  for (EdgeId e : view.omega_minus) {
    if (state.active.sign[e] != minus_sign) continue;
    const double v = state.x[tree.parent(e)];
    minus_target = minus_target ? toward(direction, *minus_target, v) : v;
    th.omega_candidates.push_back(e);
  }
  th.omega_plus = plus_target ? move_to(*plus_target) : none;
  th.omega_minus = minus_target ? move_to(*minus_target) : none;
  th.omega = toward(direction, th.omega_plus, th.omega_minus);
  th.step = toward(direction, th.edges, th.omega);
  return th;
}

Thresholds thresholds_minus(const ComponentView& view, const PrimalDualState& state,
                            const Arborescence& tree) {
  return compute_thresholds(view, state, tree, Direction::kDecrease);
}

Thresholds thresholds_plus(const ComponentView& view, const PrimalDualState& state,
                           const Arborescence& tree) {
  return compute_thresholds(view, state, tree, Direction::kIncrease);
}

StepResult advance(const Problem& problem, const PrimalDualState& state, const ComponentView& view,
                   const Attachment& attach, Direction direction, const StepTolerances& tol) {
  const Arborescence& tree = problem.tree;
  const Loss& attach_loss = problem.losses[attach.node];
  const bool down = direction == Direction::kDecrease;
  const double bound = down ? -attach.lambda : attach.mu;
  auto clip = [&](double t) { return down ? std::max(t, bound) : std::min(t, bound); };

  StepResult r;
  r.thresholds = compute_thresholds(view, state, tree, direction);
  const Thresholds& th = r.thresholds;

  double next = state.t;
  if (std::isinf(th.step)) {
    r.used_equilibrium = true;
  } else {
    const double t = state.t + th.step;
    const double gap = component_value(view, t) - attach_loss.inverse_derivative(-t);
    r.used_equilibrium = down ? gap < 0.0 : gap > 0.0;
    if (!r.used_equilibrium) next = clip(t);
  }
  if (r.used_equilibrium) {
    double t = equilibrium_t(view.group, view.beta, attach_loss);
    t = down ? std::min(t, state.t) : std::max(t, state.t);
    next = clip(t);
  }

  r.state = state;
  r.state.t = next;
  r.state.x = primal_at(view, state.x, attach_loss, attach.node, next);
  for (const EdgeValue& ev : dual_at(view, next)) r.state.z[ev.edge] = ev.value;

  const double component_x = r.state.x[attach.parent];
  const double attach_x = r.state.x[attach.node];
  const bool met = std::abs(component_x - attach_x) <= tol.equal;
  if (r.used_equilibrium || next == bound || met) {
    r.terminal_t = next;
    return r;
  }

  const double tie = tol.tie * (1.0 + std::abs(th.step));
  for (const EdgeThreshold& et : th.per_edge) {
    if (std::isinf(et.delta_t) || std::abs(et.delta_t - th.step) > tie) continue;
    r.state.active.sign[et.edge] = et.exit_sign;
    r.left_equal.push_back(et.edge);
  }
  for (EdgeId e : th.omega_candidates) {
    const bool tail_in = view.component.contains(tree.parent(e));
    const double frozen = state.x[tail_in ? e : tree.parent(e)];
    if (std::abs(frozen - component_x) > tol.equal) continue;
    r.state.active.sign[e] = Sign::kEqual;
    r.joined_equal.push_back(e);
  }
  return r;
}

StepResult step_minus(const Problem& problem, const PrimalDualState& state,
                      const ComponentView& view, const Attachment& attach,
                      const StepTolerances& tol) {
  return advance(problem, state, view, attach, Direction::kDecrease, tol);
}

StepResult step_plus(const Problem& problem, const PrimalDualState& state,
                     const ComponentView& view, const Attachment& attach,
                     const StepTolerances& tol) {
  return advance(problem, state, view, attach, Direction::kIncrease, tol);
}

double equal_tolerance(std::span<const double> x, double relative) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  return relative * (1.0 + scale);
}

PrefixPair generate(const Problem& problem, PrefixPair pair, const Attachment& attach,
                    const SolveOptions& options, GenerateStats* stats) {
  const std::size_t m = attach.node;
  if (pair.x.size() != m || pair.z.size() != m) {
    throw std::invalid_argument("prefix pair does not match attachment of node " + std::to_string(m));
  }
  const Loss& attach_loss = problem.losses[m];
  const double free_x = attach_loss.inverse_derivative(0.0);
  const double slope = attach_loss.derivative(pair.x[attach.parent]);

  GenerateStats local;
  GenerateStats& st = stats ? *stats : local;
  st = GenerateStats{};
  st.node = m;
  st.parent = attach.parent;
  st.attach_lambda = attach.lambda;
  st.attach_mu = attach.mu;
  st.attach_slope = slope;
  st.t_path.push_back(0.0);

  pair.x.push_back(free_x);
  pair.z.push_back(0.0);
  const double eq_tol = equal_tolerance(pair.x, options.equal_tolerance);

  if (slope == 0.0) {
    pair.x[m] = pair.x[attach.parent];
    st.branch = Branch::kZero;
    return pair;
  }
  if (std::abs(pair.x[attach.parent] - free_x) <= eq_tol) {
    st.branch = Branch::kZero;
    return pair;
  }
  const Direction direction = slope > 0.0 ? Direction::kDecrease : Direction::kIncrease;
  const double bound = direction == Direction::kDecrease ? attach.lambda : attach.mu;
  if (bound == 0.0) {
    st.branch = Branch::kShortcut;
    return pair;
  }
  st.branch = direction == Direction::kDecrease ? Branch::kDecrease : Branch::kIncrease;

  PrimalDualState state;
  state.t = 0.0;
  state.x = std::move(pair.x);
  state.z = std::move(pair.z);
  state.active = build_initial_active_set(problem.tree, m, state.x, eq_tol);

  const StepTolerances tol{eq_tol, options.tie_tolerance};
  const std::size_t limit = 2 * m - 1;
  std::vector<bool> left(m, false);
  const bool down = direction == Direction::kDecrease;
  const double t_limit = down ? -attach.lambda : attach.mu;

  while (true) {
    if (st.inner_iterations == limit) {
      throw InternalInvariantError("attaching node " + std::to_string(m) + " needed more than " +
                                   std::to_string(limit) + " inner iterations");
    }
    const ComponentView view = build_component_view(problem, state, attach);
    StepResult r = advance(problem, state, view, attach, direction, tol);
    ++st.inner_iterations;
    if (r.used_equilibrium && ++st.equilibrium_calls > 1) {
      throw InternalInvariantError("equilibrium solved twice while attaching node " +
                                   std::to_string(m));
    }
    const double t = r.state.t;
    const bool monotone = down ? (t <= state.t && t >= t_limit) : (t >= state.t && t <= t_limit);
    if (!monotone) {
      throw InternalInvariantError("parameter left its bracket while attaching node " +
                                   std::to_string(m));
    }
    for (EdgeId e : r.joined_equal) {
      if (left[e]) {
        ++st.equal_reentries;
        throw InternalInvariantError("edge " + edge_label(problem.tree, e) +
                                     " re-entered the equality set");
      }
    }
    for (EdgeId e : r.left_equal) left[e] = true;
    st.t_path.push_back(t);
    if (!r.terminal_t && r.left_equal.empty() && r.joined_equal.empty()) {
      throw InternalInvariantError("non-terminal step left the equality set unchanged at node " +
                                   std::to_string(m));
    }
    state = std::move(r.state);
    if (r.terminal_t) {
      st.t_star = *r.terminal_t;
      break;
    }
  }

  pair.x = std::move(state.x);
  pair.z = std::move(state.z);
  pair.z[m] = st.t_star;
  if (st.t_star * slope > 1e-12) {
    throw InternalInvariantError("new dual has the sign of f'_" + std::to_string(m));
  }
  return pair;
}

Solution solve(const Problem& problem, const SolveOptions& options) {
  problem.validate();
  PrefixPair pair;
  pair.x.push_back(problem.losses[0].inverse_derivative(0.0));
  pair.z.push_back(0.0);
  if (options.on_prefix) options.on_prefix(pair);

  Solution out;
  out.stats.generate.reserve(problem.tree.edge_count());
  for (const Attachment& attach : decompose(problem.tree)) {
    GenerateStats gs;
    pair = generate(problem, std::move(pair), attach, options, &gs);
    out.stats.inner_iterations_total += gs.inner_iterations;
    out.stats.equilibrium_calls_total += gs.equilibrium_calls;
    out.stats.generate.push_back(std::move(gs));
    if (options.on_prefix) options.on_prefix(pair);
  }
  out.x = std::move(pair.x);
  out.z = std::move(pair.z);
  out.stats.kkt_residual = kkt_residual(problem, out.x, out.z);
  if (!(out.stats.kkt_residual <= options.kkt_tolerance)) {
    throw CertificateError("KKT residual " + std::to_string(out.stats.kkt_residual) +
                           " exceeds tolerance");
  }
  return out;
}

Problem make_problem(const DirectedTree& tree, std::span<const Loss> losses,
                     std::optional<NodeId> root) {
  if (losses.size() != tree.node_count) {
    throw MalformedInstance("expected one loss per node (" + std::to_string(tree.node_count) +
                            "), got " + std::to_string(losses.size()));
  }
  Problem problem{normalize(tree, root), {}};
  problem.losses.reserve(losses.size());
  for (NodeId v = 0; v < problem.tree.node_count(); ++v) {
    problem.losses.push_back(losses[problem.tree.original_label(v)]);
  }
  return problem;
}

TreeSolution solve(const DirectedTree& tree, std::span<const Loss> losses,
                   std::optional<NodeId> root, const SolveOptions& options) {
  const Problem problem = make_problem(tree, losses, root);
  Solution internal = solve(problem, options);
  TreeSolution out;
  out.x.assign(tree.node_count, 0.0);
  out.z.assign(tree.edges.size(), 0.0);
  for (NodeId v = 0; v < problem.tree.node_count(); ++v) {
    out.x[problem.tree.original_label(v)] = internal.x[v];
  }
  for (EdgeId e = 1; e < problem.tree.node_count(); ++e) {
    const double z = internal.z[e];
    out.z[problem.tree.input_edge(e)] = problem.tree.flipped(e) ? -z : z;
  }
  out.stats = std::move(internal.stats);
  out.stats.kkt_residual = kkt_residual(losses, tree.edges, out.x, out.z);
  if (!(out.stats.kkt_residual <= options.kkt_tolerance)) {
    throw CertificateError("KKT residual " + std::to_string(out.stats.kkt_residual) +
                           " on the input orientation exceeds tolerance");
  }
  return out;
}

}  // namespace isotree
