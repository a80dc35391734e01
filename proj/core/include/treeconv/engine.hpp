#pragma once

#include <memory>
#include <string>
#include <vector>

#include "treeconv/complex.hpp"
#include "treeconv/engine_options.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/lazy_tree.hpp"
#include "treeconv/transforms.hpp"
#include "treeconv/trees.hpp"

namespace treeconv {

struct ConvergenceReport {
  int achieved_depth = 0;
  double max_delta = 0.0;  // sup over probe points of successive |ΔF|
  double residual = 0.0;   // fixed-point residual of the closure solve
  bool converged = true;
  // "exact" for finite-height trees, "truncation" when the depth ladder
  // converged, "closure" when the branch-closure system was solved.
  std::string method = "exact";

  void merge(const ConvergenceReport& other);
};

struct Evaluation {
  Complex value;
  ConvergenceReport report;
};

class DepthCapReached : public Error {
 public:
  DepthCapReached(Complex best, ConvergenceReport report);
  Complex best() const { return best_; }
  const ConvergenceReport& report() const { return report_; }

 private:
  Complex best_;
  ConvergenceReport report_;
};

struct ConvolutionProblem {
  LazyTree tree;
  std::vector<KEvaluator> measures;
  EngineOptions options;
};

// Prepared ⊞_T(μ_1,…,μ_N). The branch structure is explored once; evaluation
// at a point is pure and may run concurrently from many threads.
class TreeConvolution {
 public:
  TreeConvolution(const LazyTree& tree, std::vector<KEvaluator> measures, EngineOptions options = {});
  // Solves K_X = w·Σ_j K_{μ_j}(z − s·K_{br_j X}) instead of the w = s = 1 case.
  static TreeConvolution weighted(const LazyTree& tree, std::vector<KEvaluator> measures, double w, double s,
                                  EngineOptions options = {});

  Evaluation evaluate(Complex z) const;
  Complex operator()(Complex z) const { return evaluate(z).value; }
  // Value of the depth-d truncation, without any convergence test.
  Complex evaluate_at_depth(Complex z, int depth) const;

  KEvaluator as_evaluator(std::string descriptor = {}) const;
  // Merged report over every evaluation so far, nested convolutions included.
  ConvergenceReport aggregate_report() const;

  struct Impl;

 private:
  explicit TreeConvolution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  friend struct Impl;
  std::shared_ptr<const Impl> impl_;
};

Complex convolve_K(const FiniteTree& tree, const std::vector<KEvaluator>& measures, Complex z);
Evaluation convolve_lazy(const ConvolutionProblem& problem, Complex z);

struct FreeConvolution {
  Complex k;
  ConvergenceReport report;
  // F of the subordination branches: F_{μ⊞ν} = F_μ(omega_dagger) = F_ν(omega).
  Complex omega;         // over {∅,1,21,...}
  Complex omega_dagger;  // over {∅,2,12,...}
};
FreeConvolution free_convolve(const KEvaluator& mu, const KEvaluator& nu, Complex z,
                              const EngineOptions& options = {});

KEvaluator convolution_evaluator(const LazyTree& tree, std::vector<KEvaluator> measures,
                                 const EngineOptions& options = {});

// K_Φ(z) = (1/N) Σ_j K_μ(z − c·K_Φ(br_j T)(z)).
KEvaluator phi_N(const LazyTree& tree, double c, const KEvaluator& mu, const EngineOptions& options = {});

TreeConvolution phi_convolution(const LazyTree& tree, double c, const KEvaluator& mu,
                                const EngineOptions& options = {});

// ⊞_{T^∘k}(μ^{⊎ n(T)^{-k}}). Throws RootDegreeTooSmall when n(T) <= 1.
TreeConvolution bp_approximant(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options = {});
KEvaluator bp_limit(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options = {});

// n(T)^{-k/2}·⊞_{T^∘k}(μ,…,μ). Throws RootDegreeTooSmall when n(T) <= 1.
TreeConvolution clt_convolution(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options = {});
KEvaluator clt_scaled(const LazyTree& tree, const KEvaluator& mu, int k, const EngineOptions& options = {});

}  // namespace treeconv
