// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "isotree/bench.hpp"
#include "isotree/oracle.hpp"

using namespace isotree;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double max_gap(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct Criterion {
  int id;
  bool pass = true;
  std::string detail;
};

// Per-attachment checks gathered over every solve of the corpus.
struct CorpusTally {
  std::size_t solves = 0;
  std::size_t failed_solves = 0;
  std::string first_failure;
  double worst_residual = 0.0;
  std::size_t residual_violations = 0;
  std::size_t generate_calls = 0;
  std::size_t iteration_violations = 0;
  std::size_t equilibrium_violations = 0;
  std::size_t sign_violations = 0;
  std::size_t churn_violations = 0;
  std::size_t path_violations = 0;
  double worst_sign_product = -HUGE_VAL;
  std::size_t max_iterations = 0;

  void record(const SolveStats& stats) {
    ++solves;
    worst_residual = std::max(worst_residual, stats.kkt_residual);
    if (!(stats.kkt_residual <= 1e-8)) ++residual_violations;
    for (const GenerateStats& g : stats.generate) {
      ++generate_calls;
      max_iterations = std::max(max_iterations, g.inner_iterations);
      if (g.inner_iterations > 2 * g.node - 1) ++iteration_violations;
      if (g.equilibrium_calls > 1) ++equilibrium_violations;
      const double product = g.t_star * g.attach_slope;
      worst_sign_product = std::max(worst_sign_product, product);
      if (product > 1e-12) ++sign_violations;
      if (g.equal_reentries != 0) ++churn_violations;
      const bool down = g.branch == Branch::kDecrease;
      const bool up = g.branch == Branch::kIncrease;
      for (std::size_t q = 0; q < g.t_path.size(); ++q) {
        const double t = g.t_path[q];
        bool ok = true;
        if (down) ok = t <= 0.0 && t >= -g.attach_lambda && (q == 0 || t <= g.t_path[q - 1]);
        if (up) ok = t >= 0.0 && t <= g.attach_mu && (q == 0 || t >= g.t_path[q - 1]);
        if (!down && !up) ok = t == 0.0;
        if (!ok) {
          ++path_violations;
          break;
        }
      }
    }
  }

  void fail(const std::string& what) {
    ++solves;
    ++failed_solves;
    if (first_failure.empty()) first_failure = what;
  }
};

// Solves and tallies; returns the solution or nullopt when the solver threw.
std::optional<TreeSolution> run(const DirectedTree& tree, std::span<const Loss> losses,
                                CorpusTally& tally, const SolveOptions& options = {}) {
  try {
    TreeSolution s = solve(tree, losses, std::nullopt, options);
    tally.record(s.stats);
    return s;
  } catch (const std::exception& e) {
    tally.fail(e.what());
    return std::nullopt;
  }
}

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Criterion small_instance(CorpusTally& tally) {
  Criterion c{1};
  const DirectedTree tree{
      5, {{0, 1, kInfinity, 0.0}, {0, 2, 0.0, kInfinity}, {2, 3, 0.0, 4.0}, {2, 4, 3.0, 3.0}}};
  const std::vector<Loss> losses{Loss::quadratic(1, 4), Loss::quadratic(1, 2),
                                 Loss::quadratic(1, 2), Loss::quadratic(1, 8),
                                 Loss::quartic(1, 0.25, 0)};
  std::vector<PrefixPair> prefixes;
  SolveOptions options;
  options.on_prefix = [&](const PrefixPair& p) { prefixes.push_back(p); };
  const auto start = Clock::now();
  const auto s = run(tree, losses, tally, options);
  const double ms = ms_since(start);
  if (!s) {
    c.pass = false;
    c.detail = "solver threw: " + tally.first_failure;
    return c;
  }
  const std::vector<double> x{3, 3, 3, 4, 1}, z{-1, 0, 4, -3};
  double err = std::max(max_gap(s->x, x), max_gap(s->z, z));
  const std::vector<std::vector<double>> px{{3, 3}, {3, 3, 2}, {4, 4, 4, 4}};
  const std::vector<std::vector<double>> pz{{-1}, {-1, 0}, {-2, 2, 4}};
  if (prefixes.size() != 5) {
    c.pass = false;
  } else {
    for (std::size_t k = 0; k < 3; ++k) {
      err = std::max(err, max_gap(prefixes[k + 1].x, px[k]));
      err = std::max(err, max_gap(std::span(prefixes[k + 1].z).subspan(1), pz[k]));
    }
  }
  c.pass = c.pass && err <= 1e-8 && ms < 10.0;
  c.detail = fmt("x=(3,3,3,4,1) z=(-1,0,4,-3) and prefix pairs, max err %.3g, %.3f ms", err, ms);
  return c;
}

Criterion oracle_agreement(CorpusTally& tally) {
  Criterion c{2};
  const auto start = Clock::now();
  std::size_t agree = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    InstanceRecipe recipe;
    recipe.shape = Shape::kRandom;
    recipe.loss = LossMix::kMixed;
    recipe.n = 1 + seed % 8;
    recipe.seed = 20000 + seed;
    const RandomInstance inst = random_instance(recipe);
    const auto s = run(inst.tree, inst.losses, tally);
    if (!s) continue;
    try {
      const TreeOracleSolution o = enumerate(inst.tree, inst.losses);
      const double gap = max_gap(s->x, o.x);
      worst = std::max(worst, gap);
      if (gap <= 1e-6) ++agree;
    } catch (const std::exception& e) {
      if (c.detail.empty()) c.detail = std::string("oracle threw: ") + e.what() + "; ";
    }
  }
  const double ms = ms_since(start);
  c.pass = agree == 200 && ms < 60000.0;
  c.detail += fmt("%g/200 agree, max gap %.3g, %.1f ms", double(agree), worst, ms);
  return c;
}

Criterion pava_chains(CorpusTally& tally) {
  Criterion c{7};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t agree = 0;
  double worst = 0.0, slowest = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1000;
    DirectedTree chain{n, {}};
    std::vector<Loss> losses;
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 10.0 * unit(rng);
      w[i] = 0.5 + 1.5 * unit(rng);
      losses.push_back(Loss::quadratic(w[i], y[i]));
      if (i) chain.edges.push_back({i - 1, i, kInfinity, 0.0});
    }
    const auto start = Clock::now();
    const auto s = run(chain, losses, tally);
    const double ms = ms_since(start);
    slowest = std::max(slowest, ms);
    if (!s) continue;
    const double gap = max_gap(s->x, pava(y, w));
    worst = std::max(worst, gap);
    if (gap <= 1e-8 && ms < 2000.0) ++agree;
  }
  c.pass = agree == 50;
  c.detail = fmt("%g/50 chains (n=1000) match, max gap %.3g, slowest %.1f ms", double(agree), worst,
                 slowest);
  return c;
}

// Larger trees of every shape, to load the recursion invariants.
void wide_corpus(CorpusTally& tally) {
  std::uint64_t seed = 50000;
  for (Shape shape : {Shape::kChain, Shape::kStar, Shape::kRandom}) {
    for (LossMix loss : {LossMix::kQuadratic, LossMix::kMixed}) {
      for (std::size_t n : {20, 50, 120, 200, 400}) {
        for (int rep = 0; rep < 6; ++rep) {
          InstanceRecipe recipe;
          recipe.shape = shape;
          recipe.loss = loss;
          recipe.n = n;
          recipe.seed = seed++;
          const RandomInstance inst = random_instance(recipe);
          run(inst.tree, inst.losses, tally);
        }
      }
    }
  }
}

}  // namespace

int main() {
  CorpusTally tally;
  std::vector<Criterion> results;
  results.push_back(small_instance(tally));
  results.push_back(oracle_agreement(tally));
  const Criterion pava = pava_chains(tally);
  wide_corpus(tally);

  const std::string failures =
      tally.failed_solves ? fmt("; %g solves threw", double(tally.failed_solves)) : "";
  const bool clean = tally.failed_solves == 0;
  auto corpus = [&](int id, std::size_t violations, const std::string& detail) {
    return Criterion{id, clean && violations == 0, detail + failures};
  };
  results.push_back(corpus(3, tally.residual_violations,
                           fmt("%g solves, worst residual %.3g", double(tally.solves),
                               tally.worst_residual)));
  results.push_back(corpus(4, tally.iteration_violations,
                           fmt("%g generate calls, %g over 2m-1, max inner iterations %g",
                               double(tally.generate_calls), double(tally.iteration_violations),
                               double(tally.max_iterations))));
  results.push_back(corpus(5, tally.equilibrium_violations,
                           fmt("%g generate calls with more than one equilibrium solve",
                               double(tally.equilibrium_violations))));
  results.push_back(corpus(6, tally.sign_violations,
                           fmt("%g violations, max t*·f' = %.3g", double(tally.sign_violations),
                               tally.worst_sign_product)));
  results.push_back(pava);
  results.push_back(corpus(8, tally.churn_violations,
                           fmt("%g edges re-entered the equality set",
                               double(tally.churn_violations))));
  results.push_back(corpus(9, tally.path_violations,
                           fmt("%g generate calls with a non-monotone or unbracketed t path",
                               double(tally.path_violations))));

  bool all = true;
  for (const Criterion& c : results) {
    std::printf("criterion %d: %s  %s\n", c.id, c.pass ? "PASS" : "FAIL", c.detail.c_str());
    all = all && c.pass;
  }
  if (!tally.first_failure.empty()) std::printf("first solver failure: %s\n", tally.first_failure.c_str());
  return all ? 0 : 1;
}
