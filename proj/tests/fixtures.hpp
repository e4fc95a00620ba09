#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "isotree/bench.hpp"
#include "isotree/solver.hpp"

namespace fixtures {

using namespace isotree;

// Five-node instance used throughout: nodes 0..4, edges 0->1, 0->2, 2->3,
// 2->4. It is already an arborescence in BFS order, so internal ids equal
// input ids.
inline DirectedTree small_tree() {
  return {5,
          {{0, 1, kInfinity, 0.0}, {0, 2, 0.0, kInfinity}, {2, 3, 0.0, 4.0}, {2, 4, 3.0, 3.0}}};
}

inline std::vector<Loss> small_losses() {
  return {Loss::quadratic(1, 4), Loss::quadratic(1, 2), Loss::quadratic(1, 2),
          Loss::quadratic(1, 8), Loss::quartic(1, 0.25, 0)};
}

inline Problem small_problem() { return make_problem(small_tree(), small_losses()); }

inline const std::vector<double> kSmallX{3, 3, 3, 4, 1};
inline const std::vector<double> kSmallZ{-1, 0, 4, -3};

inline double max_gap(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Small random tree with mixed losses and weights from {0, 0.5, 2, inf}.
inline RandomInstance small_random(std::uint64_t seed, std::size_t max_n = 8) {
  InstanceRecipe recipe;
  recipe.shape = Shape::kRandom;
  recipe.loss = LossMix::kMixed;
  recipe.seed = seed;
  recipe.n = 1 + seed % max_n;
  return random_instance(recipe);
}

}  // namespace fixtures
