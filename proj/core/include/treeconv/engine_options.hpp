#pragma once

#include <cstddef>
#include <vector>

#include "treeconv/complex.hpp"

namespace treeconv {

struct EngineOptions {
  int depth_cap = 60;
  double tol = 1e-10;
  std::vector<Complex> probe_points = {Complex(0, 1), Complex(0, 2), Complex(1, 1), Complex(-1, 2),
                                       Complex(0, 5)};
  // Return the best truncation value instead of throwing DepthCapReached.
  bool allow_partial = false;
  // Solve the finite branch-closure system when truncation stalls.
  bool closure_solver = true;
  std::size_t max_closure_nodes = 1'000'000;
  std::size_t max_solver_nodes = 3000;
};

}  // namespace treeconv
