#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "treeconv/complex.hpp"

namespace treeconv {

struct DensityGrid {
  double x_min = 0.0;
  double x_max = 0.0;
  double step = 1.0;
  double epsilon = 0.0;
  std::vector<double> values;
  std::string provenance;

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * step; }
};

struct CdfGrid {
  double x_min = 0.0;
  double step = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * step; }
};

using CauchyFunction = std::function<Complex(Complex)>;

// Grid points x_min + i·step for i = 0..floor((x_max - x_min)/step).
std::size_t grid_size(double x_min, double x_max, double step);

// values[i] = max(0, -Im G(x_i + iε)/π). Evaluation is spread over `threads`
// workers; the result does not depend on the count.
DensityGrid density(const CauchyFunction& g, double x_min, double x_max, double step, double epsilon,
                    std::string provenance = {}, unsigned threads = 1);

CdfGrid cdf_from_density(const DensityGrid& d);

// Lattice search at grid-step resolution; CDFs extend as constants past the
// grid ends. Throws GridMismatch unless both grids coincide.
double levy_distance(const CdfGrid& a, const CdfGrid& b);

// Sup-norm difference of two densities on a common grid.
double sup_difference(const DensityGrid& a, const DensityGrid& b);

struct Moments {
  std::vector<double> values;
  bool mass_deficit = false;  // moment 0 below 0.99
};

Moments moments(const DensityGrid& d, int up_to);

void write_csv(std::ostream& out, const DensityGrid& d);

}  // namespace treeconv
