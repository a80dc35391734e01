#pragma once

#include <vector>

#include "treeconv/complex.hpp"
#include "treeconv/engine_options.hpp"
#include "treeconv/transforms.hpp"

namespace treeconv::detail {

struct Edge {
  int measure;
  int child;
  double count;
};

// Branch-closure graph of a lazy tree; node 0 is the root.
using EdgeLists = std::vector<std::vector<Edge>>;

// K_x = w·Σ_edges count·K_{μ}(z − s·K_child), evaluated from `previous`.
void sweep(const EdgeLists& edges, const std::vector<KEvaluator>& measures, double w, double s, Complex z,
           const std::vector<Complex>& previous, std::vector<Complex>& next);

struct ClosureSolution {
  bool ok = false;
  std::vector<Complex> k;
  double residual = 0.0;
};

// Newton's method on the finite fixed-point system, continued in Im z from a
// height where plain iteration converges down to the requested point.
ClosureSolution solve_closure(const EdgeLists& edges, const std::vector<KEvaluator>& measures, double w, double s,
                              Complex z, const EngineOptions& options);

}  // namespace treeconv::detail
