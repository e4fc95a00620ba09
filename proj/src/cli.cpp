#include "isotree/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "isotree/bench.hpp"
#include "isotree/oracle.hpp"
#include "isotree/report.hpp"

namespace isotree {
namespace {

constexpr double kOracleAgreement = 1e-6;

struct SolveFlags {
  std::string path;
  double tol = 1e-8;
  bool json = false;
  bool table = false;
  bool oracle_check = false;
};

struct BenchFlags {
  std::string shape = "chain";
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string loss = "quadratic";
  std::string weights = "random";
  bool sorted_y = false;
  std::size_t reps = 1;
};

const std::map<std::string, Shape> kShapes{
    {"chain", Shape::kChain}, {"star", Shape::kStar}, {"random", Shape::kRandom}};
const std::map<std::string, LossMix> kLosses{{"quadratic", LossMix::kQuadratic},
                                             {"mixed", LossMix::kMixed}};
const std::map<std::string, Weights> kWeights{{"random", Weights::kRandom},
                                              {"isotonic", Weights::kIsotonic}};

template <typename T>
std::vector<std::string> keys(const std::map<std::string, T>& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

void emit(const SolutionReport& report, bool table, std::ostream& out) {
  out << (table ? to_table(report) : to_json(report));
}

int cmd_solve(const SolveFlags& flags, std::ostream& out, std::ostream& err) {
  const ProblemFile file = read_problem(flags.path);
  const Instance inst = to_instance(file);
  SolveOptions options;
  options.kkt_tolerance = flags.tol;
  const TreeSolution solution = solve(inst.tree, inst.losses, inst.root, options);
  const SolutionReport report = make_report(file, inst, solution);
  emit(report, flags.table, out);

  if (!flags.oracle_check) return kExitOk;
  if (inst.tree.edges.size() > kMaxOracleEdges) {
    err << "oracle check skipped: " << inst.tree.edges.size() << " edges exceed the cap of "
        << kMaxOracleEdges << "\n";
    return kExitOk;
  }
  const TreeOracleSolution reference = enumerate(inst.tree, inst.losses, inst.root, flags.tol);
  double gap = 0.0;
  for (std::size_t i = 0; i < report.x.size(); ++i) {
    gap = std::max(gap, std::abs(report.x[i] - reference.x[i]));
  }
  if (gap > kOracleAgreement) {
    err << "oracle mismatch: max |x - x_oracle| = " << format_double(gap) << "\n";
    return kExitMismatch;
  }
  return kExitOk;
}

int cmd_oracle(const SolveFlags& flags, std::ostream& out) {
  const ProblemFile file = read_problem(flags.path);
  const Instance inst = to_instance(file);
  const TreeOracleSolution solution = enumerate(inst.tree, inst.losses, inst.root, flags.tol);
  emit(make_report(file, inst, solution), flags.table, out);
  return kExitOk;
}

int cmd_bench(const BenchFlags& flags, std::ostream& out) {
  out << "n,shape,wall_time_ms,inner_iters_total,kkt_residual\n";
  for (std::size_t r = 0; r < flags.reps; ++r) {
    InstanceRecipe recipe;
    recipe.shape = kShapes.at(flags.shape);
    recipe.n = flags.n;
    recipe.loss = kLosses.at(flags.loss);
    recipe.weights = kWeights.at(flags.weights);
    recipe.sorted_y = flags.sorted_y;
    recipe.seed = flags.seed + r;
    const RandomInstance inst = random_instance(recipe);
    const auto start = std::chrono::steady_clock::now();
    const TreeSolution solution = solve(inst.tree, inst.losses);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    char time[32];
    std::snprintf(time, sizeof time, "%.3f", ms);
    out << flags.n << "," << flags.shape << "," << time << ","
        << solution.stats.inner_iterations_total << ","
        << format_double(solution.stats.kkt_residual) << "\n";
  }
  return kExitOk;
}

void add_output_flags(CLI::App* cmd, SolveFlags& flags) {
  cmd->add_option("problem", flags.path, "Problem JSON file")->required();
  cmd->add_option("--tol", flags.tol, "KKT residual tolerance for the certificate")
      ->check(CLI::PositiveNumber);
  auto* json = cmd->add_flag("--json", flags.json, "JSON report (default)");
  auto* table = cmd->add_flag("--table", flags.table, "Plain-text table report");
  json->excludes(table);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convex isotonic regression on directed trees"};
  app.name("isotree");
  app.require_subcommand(1);

  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file and report (x, z)");
  add_output_flags(solve_cmd, solve_flags);
  solve_cmd->add_flag("--oracle-check", solve_flags.oracle_check,
                      "Cross-check against the enumeration oracle (at most 12 edges)");

  SolveFlags oracle_flags;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "Solve by sign-pattern enumeration (at most 12 edges)");
  add_output_flags(oracle_cmd, oracle_flags);

  BenchFlags bench_flags;
  auto* bench_cmd = app.add_subcommand("bench", "Time the solver on seeded random instances");
  bench_cmd->add_option("--shape", bench_flags.shape, "chain, star or random")
      ->check(CLI::IsMember(keys(kShapes)));
  bench_cmd->add_option("--n", bench_flags.n, "Number of nodes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_flags.seed, "Seed of the first instance");
  bench_cmd->add_option("--loss", bench_flags.loss, "quadratic or mixed")
      ->check(CLI::IsMember(keys(kLosses)));
  bench_cmd->add_option("--weights", bench_flags.weights, "random or isotonic")
      ->check(CLI::IsMember(keys(kWeights)));
  bench_cmd->add_flag("--sorted-y", bench_flags.sorted_y, "Sort the observations ascending");
  bench_cmd->add_option("--reps", bench_flags.reps, "Instances, seeded seed, seed+1, ...")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_flags, out, err);
    if (*oracle_cmd) return cmd_oracle(oracle_flags, out);
    return cmd_bench(bench_flags, out);
  } catch (const ParseError& e) {
    err << "parse error at " << e.what() << "\n";
    return kExitParse;
  } catch (const OracleCapExceeded& e) {
    err << "oracle: " << e.what() << "\n";
    return kExitOracleCap;
  } catch (const MalformedInstance& e) {
    err << "invalid instance: " << e.what() << "\n";
  } catch (const CertificateError& e) {
    err << "certificate failed: " << e.what() << "\n";
  } catch (const InternalInvariantError& e) {
    err << "internal invariant violated: " << e.what() << "\n";
  } catch (const OracleFailure& e) {
    err << "oracle failed: " << e.what() << "\n";
  }
  return kExitInvariant;
}

}  // namespace isotree
