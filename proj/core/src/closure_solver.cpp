#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "engine_detail.hpp"

namespace treeconv::detail {

namespace {

Complex derivative(const KEvaluator& k, Complex a) {
  double h = std::min(1e-5 * (1.0 + std::abs(a)), 0.25 * a.imag());
  h = std::max(h, 1e-12);
  return (k(a + h) - k(a - h)) / (2.0 * h);
}

class System {
 public:
  System(const EdgeLists& edges, const std::vector<KEvaluator>& measures, double w, double s)
      : edges_(edges), measures_(measures), w_(w), s_(s) {}

  bool admissible(Complex z, const std::vector<Complex>& k) const {
    for (const Complex& v : k) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
      if (!((z - s_ * v).imag() > 0.0)) return false;
    }
    return true;
  }

  double residual(Complex z, const std::vector<Complex>& k, std::vector<Complex>& r) const {
    sweep(edges_, measures_, w_, s_, z, k, r);
    double norm = 0.0;
    for (std::size_t x = 0; x < k.size(); ++x) {
      r[x] = k[x] - r[x];
      norm = std::max(norm, std::abs(r[x]));
    }
    return norm;
  }

  static double scale(const std::vector<Complex>& k) {
    double m = 0.0;
    for (const Complex& v : k) m = std::max(m, std::abs(v));
    return 1.0 + m;
  }

  bool newton(Complex z, std::vector<Complex>& k, double target, double& achieved) const {
    const Eigen::Index n = static_cast<Eigen::Index>(k.size());
    std::vector<Complex> r;
    std::vector<Complex> trial;
    std::vector<Complex> trial_r;
    double norm = residual(z, k, r);
    for (int iter = 0; iter < 60; ++iter) {
      if (norm < target * scale(k)) {
        achieved = norm;
        return true;
      }
      Eigen::MatrixXcd jac = Eigen::MatrixXcd::Identity(n, n);
      for (std::size_t x = 0; x < edges_.size(); ++x) {
        for (const Edge& e : edges_[x]) {
          const Complex d = derivative(measures_[e.measure], z - s_ * k[e.child]);
          jac(static_cast<Eigen::Index>(x), e.child) += w_ * s_ * e.count * d;
        }
      }
      Eigen::VectorXcd rhs(n);
      for (Eigen::Index x = 0; x < n; ++x) rhs(x) = -r[x];
      const Eigen::VectorXcd step = jac.partialPivLu().solve(rhs);
      if (!step.allFinite()) return false;

      double lambda = 1.0;
      bool accepted = false;
      for (int tries = 0; tries < 30; ++tries, lambda *= 0.5) {
        trial = k;
        for (Eigen::Index x = 0; x < n; ++x) trial[x] += lambda * step(x);
        if (!admissible(z, trial)) continue;
        const double trial_norm = residual(z, trial, trial_r);
        if (trial_norm < norm) {
          k.swap(trial);
          r.swap(trial_r);
          norm = trial_norm;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        achieved = norm;
        return norm < target * scale(k);
      }
    }
    achieved = norm;
    return norm < target * scale(k);
  }

 private:
  const EdgeLists& edges_;
  const std::vector<KEvaluator>& measures_;
  double w_;
  double s_;
};

}  // namespace

ClosureSolution solve_closure(const EdgeLists& edges, const std::vector<KEvaluator>& measures, double w, double s,
                              Complex z, const EngineOptions& options) {
  System system(edges, measures, w, s);
  const double target = std::max(1e-14, 1e-3 * options.tol);
  const double x = z.real();
  const double y_target = z.imag();
  double y = std::max(1.0, y_target);

  std::vector<Complex> k(edges.size(), Complex(0.0));
  std::vector<Complex> next;
  for (int it = 0; it < 20 * std::max(options.depth_cap, 1); ++it) {
    sweep(edges, measures, w, s, Complex(x, y), k, next);
    double delta = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) delta = std::max(delta, std::abs(next[i] - k[i]));
    k.swap(next);
    if (delta < target) break;
  }
  double achieved = 0.0;
  if (!system.newton(Complex(x, y), k, target, achieved)) return {};

  double ratio = 0.5;
  int failures = 0;
  for (int steps = 0; y > y_target; ++steps) {
    if (steps > 2000 || failures > 60) return {};
    const double y_next = std::max(y_target, y * ratio);
    std::vector<Complex> trial = k;
    if (system.newton(Complex(x, y_next), trial, target, achieved)) {
      k.swap(trial);
      y = y_next;
      ratio = std::max(0.05, ratio * 0.7);
    } else {
      ratio = std::sqrt(ratio);
      ++failures;
    }
  }

  for (const Complex& v : k) {
    if (v.imag() > 1e-9 * (1.0 + std::abs(v))) return {};
  }
  ClosureSolution out;
  out.ok = true;
  out.k = std::move(k);
  out.residual = achieved;
  return out;
}

}  // namespace treeconv::detail
