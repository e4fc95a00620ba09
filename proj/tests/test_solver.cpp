#include <algorithm>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "isotree/oracle.hpp"

using namespace isotree;
using fixtures::small_problem;

namespace {

// The state generate() starts from when attaching `attach` to `pair`.
PrimalDualState start_state(const Problem& p, PrefixPair pair, const Attachment& attach) {
  PrimalDualState s;
  pair.x.push_back(p.losses[attach.node].inverse_derivative(0.0));
  pair.z.push_back(0.0);
  s.active = build_initial_active_set(p.tree, attach.node, pair.x, equal_tolerance(pair.x));
  s.x = std::move(pair.x);
  s.z = std::move(pair.z);
  return s;
}

std::map<EdgeId, double> as_map(const std::vector<EdgeValue>& values) {
  std::map<EdgeId, double> out;
  for (const EdgeValue& ev : values) out[ev.edge] = ev.value;
  return out;
}

StepTolerances tolerances(const PrimalDualState& s) { return {equal_tolerance(s.x), 1e-9}; }

}  // namespace

TEST_CASE("solve reproduces the five-node instance") {
  std::vector<PrefixPair> prefixes;
  SolveOptions options;
  options.on_prefix = [&](const PrefixPair& p) { prefixes.push_back(p); };
  const Solution s = solve(small_problem(), options);
  CHECK(fixtures::max_gap(s.x, fixtures::kSmallX) <= 1e-8);
  CHECK(fixtures::max_gap(std::span(s.z).subspan(1), fixtures::kSmallZ) <= 1e-8);
  CHECK(s.stats.kkt_residual <= 1e-12);

  REQUIRE(prefixes.size() == 5);
  CHECK(prefixes[0].x == std::vector<double>{4});
  CHECK(fixtures::max_gap(prefixes[1].x, std::vector<double>{3, 3}) <= 1e-12);
  CHECK(prefixes[1].z[1] == doctest::Approx(-1));
  CHECK(fixtures::max_gap(prefixes[2].x, std::vector<double>{3, 3, 2}) <= 1e-12);
  CHECK(fixtures::max_gap(std::span(prefixes[2].z).subspan(1), std::vector<double>{-1, 0}) <=
        1e-12);
  CHECK(fixtures::max_gap(prefixes[3].x, std::vector<double>{4, 4, 4, 4}) <= 1e-12);
  CHECK(fixtures::max_gap(std::span(prefixes[3].z).subspan(1), std::vector<double>{-2, 2, 4}) <=
        1e-12);

  const auto& g = s.stats.generate;
  REQUIRE(g.size() == 4);
  CHECK(g[0].branch == Branch::kDecrease);
  CHECK(g[0].t_star == doctest::Approx(-1));
  CHECK(g[1].branch == Branch::kShortcut);
  CHECK(g[1].t_star == 0);
  CHECK(g[2].branch == Branch::kIncrease);
  CHECK(g[2].t_path == std::vector<double>{0, 1, 4});
  CHECK(g[3].branch == Branch::kDecrease);
  CHECK(g[3].t_path == std::vector<double>{0, 0, -3});
  CHECK(objective(small_problem().losses, small_problem().tree.edges(), s.x) == 20.75);
}

TEST_CASE("trivial solves") {
  SUBCASE("single node") {
    const TreeSolution s = solve(DirectedTree{1, {}}, std::vector<Loss>{Loss::quadratic(2, 7)});
    CHECK(s.x == std::vector<double>{7});
    CHECK(s.z.empty());
    CHECK(s.stats.kkt_residual == 0);
  }
  SUBCASE("sorted isotonic chain") {
    InstanceRecipe recipe;
    recipe.shape = Shape::kChain;
    recipe.n = 200;
    recipe.weights = Weights::kIsotonic;
    recipe.sorted_y = true;
    const RandomInstance inst = random_instance(recipe);
    const TreeSolution s = solve(inst.tree, inst.losses);
    CHECK(s.x == inst.y);
    for (double z : s.z) CHECK(z == 0);
    CHECK(s.stats.inner_iterations_total == 0);
  }
  SUBCASE("wrong loss count") {
    CHECK_THROWS_AS(solve(fixtures::small_tree(), std::vector<Loss>(3, Loss::quadratic(1, 0))),
                    MalformedInstance);
  }
}

TEST_CASE("generate attachment by attachment") {
  const Problem p = small_problem();
  const auto attach = decompose(p.tree);
  SolveOptions options;
  SUBCASE("node 1 pools with the root") {
    GenerateStats st;
    const PrefixPair out = generate(p, {{4}, {0}}, attach[0], options, &st);
    CHECK(out.x == std::vector<double>{3, 3});
    CHECK(out.z[1] == -1);
    CHECK(st.equilibrium_calls == 1);
  }
  SUBCASE("node 2 stops at t = 0") {
    GenerateStats st;
    const PrefixPair out = generate(p, {{3, 3}, {0, -1}}, attach[1], options, &st);
    CHECK(out.x == std::vector<double>{3, 3, 2});
    CHECK(out.z[2] == 0);
    CHECK(st.inner_iterations == 0);
  }
  SUBCASE("zero-slope attachment copies the parent") {
    Problem q = p;
    q.losses[3] = Loss::quadratic(1, 3);
    GenerateStats st;
    const PrefixPair out = generate(q, {{3, 3, 3}, {0, -1, 0}}, attach[2], options, &st);
    CHECK(st.branch == Branch::kZero);
    CHECK(out.x[3] == 3);
    CHECK(out.z[3] == 0);
  }
  SUBCASE("mismatched prefix") {
    CHECK_THROWS_AS(generate(p, {{3, 3}, {0, -1}}, attach[2], options), std::invalid_argument);
  }
}

TEST_CASE("build_initial_active_set") {
  const Problem p = small_problem();
  const ActiveSet a = build_initial_active_set(p.tree, 3, std::vector<double>{3, 3, 2}, 1e-9);
  CHECK(a.sign[1] == Sign::kEqual);
  CHECK(a.sign[2] == Sign::kGreater);
  CHECK(a.edges_with(Sign::kGreater) == std::vector<EdgeId>{2});

  const ActiveSet flat = build_initial_active_set(p.tree, 5, std::vector<double>(5, 1.0), 1e-9);
  CHECK(flat.edges_with(Sign::kEqual) == std::vector<EdgeId>{1, 2, 3, 4});

  const Problem chain{Arborescence::from_parents({0, 0, 1, 2}, {0, 1, 1, 1}, {0, 1, 1, 1}),
                      std::vector<Loss>(4, Loss::quadratic(1, 0))};
  const ActiveSet down =
      build_initial_active_set(chain.tree, 4, std::vector<double>{4, 3, 2, 1}, 1e-9);
  CHECK(down.edges_with(Sign::kGreater) == std::vector<EdgeId>{1, 2, 3});

  // x_0 > x_1 is impossible when lambda(0 -> 1) is infinite.
  CHECK_THROWS_AS(build_initial_active_set(p.tree, 2, std::vector<double>{4, 3}, 1e-9),
                  CertificateError);
  CHECK_THROWS_AS(build_initial_active_set(p.tree, 3, std::vector<double>{3, 3, 4}, 1e-9),
                  CertificateError);
}

TEST_CASE("attaching the quartic node: decrease in two steps") {
  const Problem p = small_problem();
  const Attachment attach = decompose(p.tree)[3];
  PrimalDualState s = start_state(p, {{4, 4, 4, 4}, {0, -2, 2, 4}}, attach);
  CHECK(s.x[4] == doctest::Approx(0));

  // q = 0: the whole prefix is one component, edge 3 hits mu = 4 at once.
  ComponentView view = build_component_view(p, s, attach);
  CHECK(view.component.nodes.size() == 4);
  CHECK(view.beta == 0);
  CHECK(view.omega_plus.empty());
  CHECK(view.omega_minus.empty());
  auto z0 = as_map(dual_at(view, 0));
  CHECK(z0[3] == doctest::Approx(4));
  CHECK(as_map(dual_at(view, -1))[3] == doctest::Approx(4.25));
  const Thresholds th0 = thresholds_minus(view, s, p.tree);
  CHECK(th0.step == 0);
  StepResult r = step_minus(p, s, view, attach, tolerances(s));
  CHECK_FALSE(r.terminal_t);
  CHECK(r.state.t == 0);
  CHECK(r.left_equal == std::vector<EdgeId>{3});
  CHECK(r.state.active.sign[3] == Sign::kLess);
  s = r.state;

  // q = 1: component {0, 1, 2} with edge 3 leaving it at z = 4.
  view = build_component_view(p, s, attach);
  CHECK(view.component.nodes.size() == 3);
  CHECK(view.beta == 4);
  CHECK(view.omega_plus == std::vector<EdgeId>{3});
  for (const EdgeValue& a : view.alphas()) CHECK(a.value == 0);
  CHECK(component_value(view, 0) == doctest::Approx(4));
  CHECK(component_value(view, -3) == doctest::Approx(3));
  z0 = as_map(dual_at(view, 0));
  CHECK(z0[1] == doctest::Approx(-2));
  CHECK(z0[2] == doctest::Approx(2));
  const auto z3 = as_map(dual_at(view, -3));
  CHECK(z3.at(1) == doctest::Approx(-1));
  CHECK(z3.at(2) == doctest::Approx(0));

  const Thresholds th1 = thresholds_minus(view, s, p.tree);
  CHECK(th1.edges == doctest::Approx(-3));
  CHECK(th1.step == doctest::Approx(-3));
  for (const EdgeThreshold& et : th1.per_edge) {
    if (et.edge == 1) CHECK(et.delta_t == doctest::Approx(-6));
    if (et.edge == 2) CHECK(et.delta_t == doctest::Approx(-3));
  }
  const std::vector<double> x3 = primal_at(view, s.x, p.losses[4], 4, -3);
  CHECK(fixtures::max_gap(x3, fixtures::kSmallX) <= 1e-12);

  r = step_minus(p, s, view, attach, tolerances(s));
  REQUIRE(r.terminal_t);
  CHECK(*r.terminal_t == doctest::Approx(-3));
  CHECK_FALSE(r.used_equilibrium);
  CHECK(fixtures::max_gap(r.state.x, fixtures::kSmallX) <= 1e-12);
}

TEST_CASE("attaching node 3: increase in two steps") {
  const Problem p = small_problem();
  const Attachment attach = decompose(p.tree)[2];
  PrimalDualState s = start_state(p, {{3, 3, 2}, {0, -1, 0}}, attach);
  CHECK(s.active.sign[2] == Sign::kGreater);

  ComponentView view = build_component_view(p, s, attach);
  CHECK(view.component.nodes == std::vector<NodeId>{2});
  CHECK(view.omega_minus == std::vector<EdgeId>{2});
  CHECK(dual_at(view, 0).empty());
  const Thresholds th0 = thresholds_plus(view, s, p.tree);
  CHECK(th0.omega_minus == doctest::Approx(1));
  CHECK(th0.step == doctest::Approx(1));
  StepResult r = step_plus(p, s, view, attach, tolerances(s));
  CHECK_FALSE(r.terminal_t);
  CHECK(r.state.t == doctest::Approx(1));
  CHECK(r.joined_equal == std::vector<EdgeId>{2});
  CHECK(r.state.x[3] == doctest::Approx(7));
  s = r.state;

  view = build_component_view(p, s, attach);
  CHECK(view.component.nodes.size() == 3);
  const Thresholds th1 = thresholds_plus(view, s, p.tree);
  CHECK(std::isinf(th1.step));
  CHECK(component_value(view, 4) == doctest::Approx(4));
  r = step_plus(p, s, view, attach, tolerances(s));
  REQUIRE(r.terminal_t);
  CHECK(r.used_equilibrium);
  CHECK(*r.terminal_t == doctest::Approx(4));
  CHECK(fixtures::max_gap(r.state.x, std::vector<double>{4, 4, 4, 4}) <= 1e-12);
  const auto z = as_map(dual_at(view, 4));
  CHECK(z.at(1) == doctest::Approx(-2));
  CHECK(z.at(2) == doctest::Approx(2));
}

TEST_CASE("attaching node 1: equilibrium from a singleton") {
  const Problem p = small_problem();
  const Attachment attach = decompose(p.tree)[0];
  const PrimalDualState s = start_state(p, {{4}, {0}}, attach);
  const ComponentView view = build_component_view(p, s, attach);
  CHECK(view.beta == 0);
  CHECK(view.alpha.size() == 1);
  const Thresholds th = thresholds_minus(view, s, p.tree);
  CHECK(th.step == -HUGE_VAL);
  const StepResult r = step_minus(p, s, view, attach, tolerances(s));
  CHECK(r.used_equilibrium);
  REQUIRE(r.terminal_t);
  CHECK(*r.terminal_t == doctest::Approx(-1));
  CHECK(r.state.x == std::vector<double>{3, 3});
}

TEST_CASE("clipping at the attachment bound") {
  // The new node wants to sit at 10, the parent at 0; mu = 2 caps the pull.
  const Problem p{Arborescence::from_parents({0, 0}, {0, 5}, {0, 2}),
                  {Loss::quadratic(1, 0), Loss::quadratic(1, 10)}};
  const Solution s = solve(p);
  CHECK(s.z[1] == 2);
  CHECK(s.x[0] == doctest::Approx(2));
  CHECK(s.x[1] == doctest::Approx(8));
  CHECK(s.stats.generate[0].t_path == std::vector<double>{0, 2});
  CHECK(s.stats.generate[0].equilibrium_calls == 1);
}

TEST_CASE("kkt_residual") {
  const Problem p = small_problem();
  std::vector<double> z{0};
  z.insert(z.end(), fixtures::kSmallZ.begin(), fixtures::kSmallZ.end());
  CHECK(kkt_residual(p, fixtures::kSmallX, z) == 0);
  std::vector<double> x = fixtures::kSmallX;
  x[0] += 0.1;
  CHECK(kkt_residual(p, x, z) >= 0.1);
  const std::vector<Loss> one{Loss::quartic(1, 0.25, -3)};
  CHECK(kkt_residual(one, {}, std::vector<double>{1}, {}) == 0);
  // z outside the box and away from the forced endpoint.
  const std::vector<Edge> e{{0, 1, 1, 1}};
  const std::vector<Loss> two{Loss::quadratic(1, 0), Loss::quadratic(1, 0)};
  CHECK(kkt_residual(two, e, std::vector<double>{0, 0}, std::vector<double>{0}) == 0);
  CHECK(kkt_residual(two, e, std::vector<double>{0, 0}, std::vector<double>{3}) > 2);
}

TEST_CASE("objective") {
  const std::vector<Loss> two{Loss::quadratic(1, 0), Loss::quadratic(1, 0)};
  const std::vector<Edge> e{{0, 1, 2, kInfinity}};
  CHECK(objective(two, e, std::vector<double>{1, 0}) == 0.5 + 2);
  CHECK(std::isinf(objective(two, e, std::vector<double>{0, 1})));
  CHECK(objective(two, e, std::vector<double>{0, 0}) == 0);
}

TEST_CASE("component formulas reproduce the starting state") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const RandomInstance inst = fixtures::small_random(seed, 30);
    const Problem p = make_problem(inst.tree, inst.losses);
    std::vector<PrefixPair> prefixes;
    SolveOptions options;
    options.on_prefix = [&](const PrefixPair& pp) { prefixes.push_back(pp); };
    solve(p, options);
    const auto attach = decompose(p.tree);
    for (std::size_t k = 0; k < attach.size(); ++k) {
      const PrimalDualState s = start_state(p, prefixes[k], attach[k]);
      const ComponentView view = build_component_view(p, s, attach[k]);
      CHECK(std::abs(component_value(view, 0) - s.x[attach[k].parent]) <= 1e-10);
      for (const EdgeValue& ev : dual_at(view, 0)) CHECK(std::abs(ev.value - s.z[ev.edge]) <= 1e-10);
    }
  }
}

TEST_CASE("recursion invariants on random trees") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const RandomInstance inst = fixtures::small_random(seed, 60);
    const TreeSolution s = solve(inst.tree, inst.losses);
    CHECK(s.stats.kkt_residual <= 1e-8);
    for (const GenerateStats& g : s.stats.generate) {
      CHECK(g.inner_iterations <= 2 * g.node - 1);
      CHECK(g.equilibrium_calls <= 1);
      CHECK(g.equal_reentries == 0);
      CHECK(g.t_star * g.attach_slope <= 1e-12);
      const bool down = g.branch == Branch::kDecrease;
      for (std::size_t q = 1; q < g.t_path.size(); ++q) {
        if (down) {
          CHECK(g.t_path[q] <= g.t_path[q - 1]);
          CHECK(g.t_path[q] >= -g.attach_lambda);
        } else {
          CHECK(g.t_path[q] >= g.t_path[q - 1]);
          CHECK(g.t_path[q] <= g.attach_mu);
        }
      }
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("solver agrees with the oracle on small trees") {
  for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
    const RandomInstance inst = fixtures::small_random(seed);
    const TreeSolution s = solve(inst.tree, inst.losses);
    const TreeOracleSolution o = enumerate(inst.tree, inst.losses);
    CHECK(fixtures::max_gap(s.x, o.x) <= 1e-6);
  }
}
