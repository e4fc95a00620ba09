#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "isotree/solver.hpp"

namespace isotree {

// JSON problem files.
//
//   {"nodes": [{"id": 1, "loss": {"type": "quadratic", "y": 4.0, "w": 1.0}}, ...],
//    "edges": [{"from": 1, "to": 2, "lambda": "inf", "mu": 0}, ...],
//    "root": 1}
//
// Quartic losses are {"type": "quartic", "a": .., "b": .., "c": ..}. Weights
// are numbers or the string "inf". "root" is optional.

/// Syntax or schema error. `where` is a byte offset ("byte 17") for syntax
/// errors and a JSON pointer ("/edges/2/mu") for schema errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct FileNode {
  std::int64_t id = 0;
  Loss loss = Loss::quadratic(1.0, 0.0);
};

struct FileEdge {
  std::int64_t from = 0;
  std::int64_t to = 0;
  double lambda = 0.0;
  double mu = 0.0;
};

struct ProblemFile {
  std::vector<FileNode> nodes;
  std::vector<FileEdge> edges;
  std::optional<std::int64_t> root;
};

/// Parses the JSON text. Only syntax and field types are checked here;
/// structural checks happen in to_instance. Invalid loss parameters are
/// reported as MalformedInstance.
ProblemFile parse_problem(std::string_view text);

/// Reads and parses a file. An unreadable file is a ParseError at the path.
ProblemFile read_problem(const std::string& path);

/// Canonical JSON for `file`; parse_problem(emit_problem(f)) reproduces f.
std::string emit_problem(const ProblemFile& file);

/// The file as a solver instance: nodes renumbered 0..n-1 in file order,
/// edges kept in file order.
struct Instance {
  DirectedTree tree;
  std::vector<Loss> losses;
  std::optional<NodeId> root;
};

/// Throws MalformedInstance on duplicate ids, edges naming unknown ids, an
/// unknown root, or a graph that is not a directed tree.
Instance to_instance(const ProblemFile& file);

/// "%.17g", with "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

}  // namespace isotree
