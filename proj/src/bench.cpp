#include "isotree/bench.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace isotree {

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::kChain:
      return "chain";
    case Shape::kStar:
      return "star";
    case Shape::kRandom:
      return "random";
  }
  return "?";
}

RandomInstance random_instance(const InstanceRecipe& recipe) {
  if (recipe.n == 0) throw std::invalid_argument("random_instance: n must be at least 1");
  std::mt19937_64 rng(recipe.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = recipe.n;

  RandomInstance out;
  out.y.resize(n);
  for (double& y : out.y) y = 10.0 * unit(rng);
  if (recipe.sorted_y) std::sort(out.y.begin(), out.y.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (recipe.loss == LossMix::kMixed && unit(rng) < 0.5) {
      out.losses.push_back(Loss::quartic(0.5, 0.05 * unit(rng), -out.y[i]));
    } else {
      out.losses.push_back(Loss::quadratic(1.0, out.y[i]));
    }
  }

  static constexpr double kLevels[] = {0.0, 0.5, 2.0, kInfinity};
  auto draw = [&] { return kLevels[std::uniform_int_distribution<int>(0, 3)(rng)]; };
  auto add_edge = [&](NodeId tail, NodeId head) {
    Edge e{tail, head, kInfinity, 0.0};
    if (recipe.weights == Weights::kRandom) {
      e.lambda = draw();
      e.mu = draw();
    }
    out.tree.edges.push_back(e);
  };

  out.tree.node_count = n;
  for (NodeId v = 1; v < n; ++v) {
    switch (recipe.shape) {
      case Shape::kChain:
        add_edge(v - 1, v);
        break;
      case Shape::kStar:
        add_edge(0, v);
        break;
      case Shape::kRandom: {
        const NodeId p = std::uniform_int_distribution<NodeId>(0, v - 1)(rng);
        if (unit(rng) < 0.5) {
          add_edge(p, v);
        } else {
          add_edge(v, p);
        }
        break;
      }
    }
  }
  if (recipe.shape == Shape::kRandom) {
    std::vector<NodeId> label(n);
    std::iota(label.begin(), label.end(), NodeId{0});
    std::shuffle(label.begin(), label.end(), rng);
    for (Edge& e : out.tree.edges) {
      e.tail = label[e.tail];
      e.head = label[e.head];
    }
    std::vector<Loss> losses(out.losses);
    std::vector<double> y(out.y);
    for (NodeId v = 0; v < n; ++v) {
      losses[label[v]] = out.losses[v];
      y[label[v]] = out.y[v];
    }
    out.losses = std::move(losses);
    out.y = std::move(y);
  }
  return out;
}

}  // namespace isotree
