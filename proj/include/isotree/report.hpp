#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "isotree/oracle.hpp"
#include "isotree/problem_file.hpp"

namespace isotree {

struct ReportStats {
  std::size_t generate_calls = 0;
  std::size_t inner_iterations_total = 0;
  std::size_t equilibrium_calls_total = 0;
  std::size_t patterns_tried = 0;  // oracle runs only
};

/// Solution in file terms: x per node id, z per file edge in the file's
/// orientation. The residual is always recomputed on that orientation.
struct SolutionReport {
  std::string solver;  // "recursive" or "oracle"
  std::vector<std::int64_t> ids;
  std::vector<double> x;
  std::vector<FileEdge> edges;
  std::vector<double> z;
  std::optional<std::vector<Sign>> pattern;  // oracle runs only, per file edge
  double objective = 0.0;
  double kkt_residual = 0.0;
  ReportStats stats;
};

SolutionReport make_report(const ProblemFile& file, const Instance& instance,
                           const TreeSolution& solution);
SolutionReport make_report(const ProblemFile& file, const Instance& instance,
                           const TreeOracleSolution& solution);

/// Fixed key order and "%.17g" numbers, so equal inputs give equal bytes.
std::string to_json(const SolutionReport& report);
std::string to_table(const SolutionReport& report);

}  // namespace isotree
