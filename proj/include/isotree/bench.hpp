#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isotree/solver.hpp"

namespace isotree {

// Seeded random instances for the bench command and the property suites.
//
// Recipe (std::mt19937_64 seeded with `seed`, draws in node order):
//   y_i ~ uniform[0, 10]
//   quadratic loss: w = 1, y = y_i
//   mixed: each node is quadratic or quartic with probability 1/2; the
//     quartic is a = 0.5, b ~ uniform[0, 0.05], c = -y_i
//   weights, kRandom: lambda and mu drawn independently from
//     {0, 0.5, 2, inf}, each with probability 1/4
//   weights, kIsotonic: lambda = inf, mu = 0 (x_tail <= x_head)
//   chain:  edges i -> i+1
//   star:   edges 0 -> i
//   random: node i attaches to a uniform earlier node, the edge direction is
//     a fair coin, then labels are shuffled
enum class Shape { kChain, kStar, kRandom };
enum class LossMix { kQuadratic, kMixed };
enum class Weights { kRandom, kIsotonic };

struct InstanceRecipe {
  Shape shape = Shape::kRandom;
  std::size_t n = 1;
  LossMix loss = LossMix::kQuadratic;
  Weights weights = Weights::kRandom;
  bool sorted_y = false;  // draw y, then sort it ascending
  std::uint64_t seed = 0;
};

struct RandomInstance {
  DirectedTree tree;
  std::vector<Loss> losses;
  std::vector<double> y;
};

RandomInstance random_instance(const InstanceRecipe& recipe);

const char* shape_name(Shape s);

}  // namespace isotree
