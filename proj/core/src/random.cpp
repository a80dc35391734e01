#include "treeconv/random.hpp"

#include <vector>

namespace treeconv {

FiniteTree random_tree(Rng& rng, int alphabet, int max_depth, double p_child) {
  std::vector<Word> vertices{Word{}};
  std::vector<Word> frontier{Word{}};
  for (int depth = 0; depth < max_depth; ++depth) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (int j = 1; j <= alphabet; ++j) {
        if (!w.empty() && w.front() == j) continue;
        if (!rng.chance(p_child)) continue;
        Word child{j};
        child.insert(child.end(), w.begin(), w.end());
        next.push_back(child);
        vertices.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  return FiniteTree::validate(alphabet, vertices);
}

MeasureSpecPtr random_atomic(Rng& rng, int max_atoms) {
  const int count = rng.integer(1, max_atoms);
  std::vector<double> weights(count);
  std::vector<double> atoms(count);
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    weights[i] = rng.uniform(0.1, 1.0);
    atoms[i] = rng.uniform(-2.0, 2.0);
    total += weights[i];
  }
  double acc = 0.0;
  for (int i = 0; i + 1 < count; ++i) {
    weights[i] /= total;
    acc += weights[i];
  }
  weights[count - 1] = 1.0 - acc;
  return MeasureSpec::atomic(std::move(weights), std::move(atoms));
}

Complex random_point(Rng& rng) { return Complex(rng.uniform(-3.0, 3.0), rng.uniform(0.1, 3.0)); }

}  // namespace treeconv
