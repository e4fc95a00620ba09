#include "isotree/problem_file.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace isotree {
namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& at) {
  if (!obj.is_object()) throw ParseError(at, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at, std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const json& obj, const char* key, const std::string& at) {
  const json& v = field(obj, key, at);
  if (!v.is_number()) throw ParseError(at + "/" + key, "expected a number");
  return v.get<double>();
}

double weight(const json& obj, const char* key, const std::string& at) {
  const json& v = field(obj, key, at);
  if (v.is_string() && v.get<std::string>() == "inf") return kInfinity;
  if (!v.is_number()) throw ParseError(at + "/" + key, "expected a number or \"inf\"");
  return v.get<double>();
}

std::int64_t id(const json& obj, const char* key, const std::string& at) {
  const json& v = field(obj, key, at);
  if (!v.is_number_integer()) throw ParseError(at + "/" + key, "expected an integer id");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > INT64_MAX) {
    throw ParseError(at + "/" + key, "id out of range");
  }
  return v.get<std::int64_t>();
}

Loss parse_loss(const json& obj, const std::string& at) {
  const json& type = field(obj, "type", at);
  if (!type.is_string()) throw ParseError(at + "/type", "expected a string");
  const std::string kind = type.get<std::string>();
  try {
    if (kind == "quadratic") return Loss::quadratic(number(obj, "w", at), number(obj, "y", at));
    if (kind == "quartic") {
      return Loss::quartic(number(obj, "a", at), number(obj, "b", at), number(obj, "c", at));
    }
  } catch (const std::invalid_argument& e) {
    throw MalformedInstance(at + ": " + e.what());
  }
  throw ParseError(at + "/type", "unknown loss type \"" + kind + "\"");
}

const json& array(const json& obj, const char* key) {
  const json& v = field(obj, key, "");
  if (!v.is_array()) throw ParseError(std::string("/") + key, "expected an array");
  return v;
}

std::string weight_text(double w) { return std::isinf(w) ? "\"inf\"" : format_double(w); }

std::string loss_text(const Loss& loss) {
  if (const auto* q = std::get_if<WeightedQuadratic>(&loss.base())) {
    return "{\"type\": \"quadratic\", \"y\": " + format_double(q->y) +
           ", \"w\": " + format_double(q->w) + "}";
  }
  const auto& q = std::get<QuarticQuadratic>(loss.base());
  return "{\"type\": \"quartic\", \"a\": " + format_double(q.a) + ", \"b\": " +
         format_double(q.b) + ", \"c\": " + format_double(q.c) + "}";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ProblemFile parse_problem(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "malformed JSON");
  }
  if (!doc.is_object()) throw ParseError("/", "expected an object");

  ProblemFile file;
  const json& nodes = array(doc, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string at = "/nodes/" + std::to_string(i);
    FileNode node;
    node.id = id(nodes[i], "id", at);
    node.loss = parse_loss(field(nodes[i], "loss", at), at + "/loss");
    file.nodes.push_back(node);
  }
  const json& edges = array(doc, "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string at = "/edges/" + std::to_string(i);
    file.edges.push_back({id(edges[i], "from", at), id(edges[i], "to", at),
                          weight(edges[i], "lambda", at), weight(edges[i], "mu", at)});
  }
  if (doc.contains("root") && !doc["root"].is_null()) file.root = id(doc, "root", "");
  return file;
}

ProblemFile read_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_problem(text.str());
}

std::string emit_problem(const ProblemFile& file) {
  std::string out = "{\n  \"nodes\": [";
  for (std::size_t i = 0; i < file.nodes.size(); ++i) {
    out += i ? ",\n    " : "\n    ";
    out += "{\"id\": " + std::to_string(file.nodes[i].id) + ", \"loss\": " +
           loss_text(file.nodes[i].loss) + "}";
  }
  out += file.nodes.empty() ? "],\n" : "\n  ],\n";
  out += "  \"edges\": [";
  for (std::size_t i = 0; i < file.edges.size(); ++i) {
    const FileEdge& e = file.edges[i];
    out += i ? ",\n    " : "\n    ";
    out += "{\"from\": " + std::to_string(e.from) + ", \"to\": " + std::to_string(e.to) +
           ", \"lambda\": " + weight_text(e.lambda) + ", \"mu\": " + weight_text(e.mu) + "}";
  }
  out += file.edges.empty() ? "]" : "\n  ]";
  if (file.root) out += ",\n  \"root\": " + std::to_string(*file.root);
  out += "\n}\n";
  return out;
}

Instance to_instance(const ProblemFile& file) {
  std::unordered_map<std::int64_t, NodeId> index;
  Instance inst;
  inst.tree.node_count = file.nodes.size();
  for (std::size_t i = 0; i < file.nodes.size(); ++i) {
    if (!index.emplace(file.nodes[i].id, i).second) {
      throw MalformedInstance("duplicate node id " + std::to_string(file.nodes[i].id));
    }
    inst.losses.push_back(file.nodes[i].loss);
  }
  auto lookup = [&](std::int64_t id, const std::string& what) {
    auto it = index.find(id);
    if (it == index.end()) throw MalformedInstance(what + " names unknown node id " + std::to_string(id));
    return it->second;
  };
  for (std::size_t k = 0; k < file.edges.size(); ++k) {
    const FileEdge& e = file.edges[k];
    const std::string what = "edge " + std::to_string(k);
    inst.tree.edges.push_back({lookup(e.from, what), lookup(e.to, what), e.lambda, e.mu});
  }
  if (file.root) inst.root = lookup(*file.root, "root");
  validate(inst.tree);
  return inst;
}

}  // namespace isotree
