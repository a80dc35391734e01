#include "treeconv/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <ostream>
#include <thread>

#include "treeconv/errors.hpp"

namespace treeconv {

namespace {

bool same_grid(double x0, double s0, std::size_t n0, double x1, double s1, std::size_t n1) {
  const double tol = 1e-9 * std::max(s0, s1);
  return n0 == n1 && std::abs(x0 - x1) <= tol && std::abs(s0 - s1) <= 1e-12 * std::max(s0, s1);
}

}  // namespace

std::size_t grid_size(double x_min, double x_max, double step) {
  if (!(step > 0) || !std::isfinite(step)) throw Error(ErrorKind::DomainError, "grid step must be positive");
  if (!(x_max >= x_min)) throw Error(ErrorKind::DomainError, "grid needs x_max >= x_min");
  return static_cast<std::size_t>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
}

DensityGrid density(const CauchyFunction& g, double x_min, double x_max, double step, double epsilon,
                    std::string provenance, unsigned threads) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw Error(ErrorKind::DomainError, "epsilon must be positive");
  DensityGrid out;
  out.x_min = x_min;
  out.x_max = x_max;
  out.step = step;
  out.epsilon = epsilon;
  out.provenance = std::move(provenance);
  const std::size_t n = grid_size(x_min, x_max, step);
  std::vector<double> raw(n, 0.0);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        raw[i] = -g(Complex(out.x(i), epsilon)).imag() / std::numbers::pi;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  double scale = 1.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw Error(ErrorKind::DomainError, "non-finite density value");
    scale = std::max(scale, std::abs(v));
  }
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] < -1e-12 * scale) {
      throw Error(ErrorKind::DomainError, "negative density " + std::to_string(raw[i]) + " at x = " +
                                              std::to_string(out.x(i)));
    }
    out.values[i] = std::max(0.0, raw[i]);
  }
  return out;
}

CdfGrid cdf_from_density(const DensityGrid& d) {
  CdfGrid out;
  out.x_min = d.x_min;
  out.step = d.step;
  out.values.resize(d.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    acc += 0.5 * d.step * (d.values[i - 1] + d.values[i]);
    out.values[i] = std::clamp(acc, 0.0, 1.0);
  }
  return out;
}

double levy_distance(const CdfGrid& a, const CdfGrid& b) {
  if (!same_grid(a.x_min, a.step, a.size(), b.x_min, b.step, b.size())) {
    throw Error(ErrorKind::GridMismatch, "Levy distance needs identical grids");
  }
  const long n = static_cast<long>(a.size());
  if (n == 0) return 0.0;
  auto at = [&](long i) { return a.values[static_cast<std::size_t>(std::clamp(i, 0L, n - 1))]; };
  auto holds = [&](long k) {
    const double eps = static_cast<double>(k) * a.step;
    for (long i = 0; i < n; ++i) {
      const double f2 = b.values[static_cast<std::size_t>(i)];
      if (at(i - k) - eps > f2 + 1e-12 || f2 > at(i + k) + eps + 1e-12) return false;
    }
    return true;
  };
  long hi = static_cast<long>(std::ceil(1.0 / a.step));
  if (!holds(hi)) return 1.0;
  long lo = -1;  // holds(lo) is false or lo is below the lattice
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (holds(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::min(1.0, static_cast<double>(hi) * a.step);
}

double sup_difference(const DensityGrid& a, const DensityGrid& b) {
  if (!same_grid(a.x_min, a.step, a.size(), b.x_min, b.step, b.size())) {
    throw Error(ErrorKind::GridMismatch, "densities live on different grids");
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sup = std::max(sup, std::abs(a.values[i] - b.values[i]));
  return sup;
}

Moments moments(const DensityGrid& d, int up_to) {
  if (up_to < 0) throw Error(ErrorKind::InvalidSpec, "moment order must be nonnegative");
  Moments out;
  out.values.assign(static_cast<std::size_t>(up_to) + 1, 0.0);
  for (int k = 0; k <= up_to; ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i < d.size(); ++i) {
      const double f0 = std::pow(d.x(i - 1), k) * d.values[i - 1];
      const double f1 = std::pow(d.x(i), k) * d.values[i];
      acc += 0.5 * d.step * (f0 + f1);
    }
    out.values[static_cast<std::size_t>(k)] = acc;
  }
  out.mass_deficit = out.values[0] < 0.99;
  return out;
}

void write_csv(std::ostream& out, const DensityGrid& d) {
  out << "x,density\n";
  char buf[64];
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", d.x(i), d.values[i]);
    out << buf;
  }
}

}  // namespace treeconv
