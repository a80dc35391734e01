#pragma once

#include <cstdint>
#include <random>

#include "treeconv/complex.hpp"
#include "treeconv/transforms.hpp"
#include "treeconv/trees.hpp"

namespace treeconv {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }

 private:
  std::mt19937_64 engine_;
};

// Each admissible child of a vertex shorter than max_depth appears with
// probability p_child.
FiniteTree random_tree(Rng& rng, int alphabet, int max_depth, double p_child);

// One to max_atoms atoms in [-2, 2] with random positive weights.
MeasureSpecPtr random_atomic(Rng& rng, int max_atoms = 3);

// Re in [-3, 3], Im in [0.1, 3].
Complex random_point(Rng& rng);

}  // namespace treeconv
