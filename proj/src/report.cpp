#include "isotree/report.hpp"

#include <cmath>
#include <cstdio>

namespace isotree {
namespace {

SolutionReport base_report(const ProblemFile& file, const Instance& instance,
                           std::vector<double> x, std::vector<double> z) {
  SolutionReport r;
  for (const FileNode& n : file.nodes) r.ids.push_back(n.id);
  r.edges = file.edges;
  r.x = std::move(x);
  r.z = std::move(z);
  r.objective = objective(instance.losses, instance.tree.edges, r.x);
  r.kkt_residual = kkt_residual(instance.losses, instance.tree.edges, r.x, r.z);
  return r;
}

std::string weight_text(double w) { return std::isinf(w) ? "\"inf\"" : format_double(w); }

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

SolutionReport make_report(const ProblemFile& file, const Instance& instance,
                           const TreeSolution& solution) {
  SolutionReport r = base_report(file, instance, solution.x, solution.z);
  r.solver = "recursive";
  r.stats.generate_calls = solution.stats.generate.size();
  r.stats.inner_iterations_total = solution.stats.inner_iterations_total;
  r.stats.equilibrium_calls_total = solution.stats.equilibrium_calls_total;
  return r;
}

SolutionReport make_report(const ProblemFile& file, const Instance& instance,
                           const TreeOracleSolution& solution) {
  SolutionReport r = base_report(file, instance, solution.x, solution.z);
  r.solver = "oracle";
  r.pattern = solution.pattern;
  r.stats.patterns_tried = solution.patterns_tried;
  return r;
}

std::string to_json(const SolutionReport& r) {
  std::string out = "{\n  \"solver\": \"" + r.solver + "\",\n  \"x\": [";
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    out += i ? ",\n    " : "\n    ";
    out += "{\"id\": " + std::to_string(r.ids[i]) + ", \"value\": " + format_double(r.x[i]) + "}";
  }
  out += r.x.empty() ? "],\n" : "\n  ],\n";
  out += "  \"z\": [";
  for (std::size_t k = 0; k < r.z.size(); ++k) {
    const FileEdge& e = r.edges[k];
    out += k ? ",\n    " : "\n    ";
    out += "{\"from\": " + std::to_string(e.from) + ", \"to\": " + std::to_string(e.to) +
           ", \"lambda\": " + weight_text(e.lambda) + ", \"mu\": " + weight_text(e.mu) +
           ", \"value\": " + format_double(r.z[k]);
    if (r.pattern) out += std::string(", \"sign\": \"") + sign_char((*r.pattern)[k]) + "\"";
    out += "}";
  }
  out += r.z.empty() ? "],\n" : "\n  ],\n";
  out += "  \"objective\": " + format_double(r.objective) + ",\n";
  out += "  \"kkt_residual\": " + format_double(r.kkt_residual) + ",\n";
  out += "  \"stats\": {";
  if (r.solver == "oracle") {
    out += "\"patterns_tried\": " + std::to_string(r.stats.patterns_tried);
  } else {
    out += "\"generate_calls\": " + std::to_string(r.stats.generate_calls) +
           ", \"inner_iterations_total\": " + std::to_string(r.stats.inner_iterations_total) +
           ", \"equilibrium_calls_total\": " + std::to_string(r.stats.equilibrium_calls_total);
  }
  out += "}\n}\n";
  return out;
}

std::string to_table(const SolutionReport& r) {
  std::string out = "node                    x\n";
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    out += pad(std::to_string(r.ids[i]), 4) + " " + pad(format_double(r.x[i]), 24) + "\n";
  }
  if (!r.z.empty()) {
    out += "\nedge            lambda       mu                        z";
    out += r.pattern ? "  sign\n" : "\n";
    for (std::size_t k = 0; k < r.z.size(); ++k) {
      const FileEdge& e = r.edges[k];
      std::string name = std::to_string(e.from) + "->" + std::to_string(e.to);
      if (name.size() < 12) name.append(12 - name.size(), ' ');
      out += name + pad(format_double(e.lambda), 10) + " " + pad(format_double(e.mu), 8) + " " +
             pad(format_double(r.z[k]), 24);
      if (r.pattern) out += std::string("     ") + sign_char((*r.pattern)[k]);
      out += "\n";
    }
  }
  out += "\nobjective     " + format_double(r.objective) + "\n";
  out += "kkt_residual  " + format_double(r.kkt_residual) + "\n";
  return out;
}

}  // namespace isotree
