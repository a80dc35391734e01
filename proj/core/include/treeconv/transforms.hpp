#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "treeconv/complex.hpp"
#include "treeconv/engine_options.hpp"
#include "treeconv/lazy_tree.hpp"

namespace treeconv {

// K-transform of a probability measure: a map from the upper half-plane into
// its closed lower mirror. Calls are not domain-checked.
class KEvaluator {
 public:
  using Fn = std::function<Complex(Complex)>;

  KEvaluator() = default;
  KEvaluator(Fn fn, std::string descriptor);

  Complex operator()(Complex z) const { return impl_->fn(z); }
  const std::string& descriptor() const { return impl_->descriptor; }
  // Evaluators copied from one another share an identity.
  const void* identity() const { return impl_.get(); }
  bool same_as(const KEvaluator& other) const { return impl_ == other.impl_; }
  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  struct Impl {
    Fn fn;
    std::string descriptor;
  };
  std::shared_ptr<const Impl> impl_;
};

struct MeasureSpec;
using MeasureSpecPtr = std::shared_ptr<const MeasureSpec>;

struct AtomicLaw {
  std::vector<double> weights;
  std::vector<double> atoms;
};
struct SemicircleLaw {
  double mean = 0.0;
  double variance = 1.0;
};
struct ArcsineLaw {
  double center = 0.0;
  double radius = 2.0;
};
struct CauchyLaw {
  double location = 0.0;
  double scale = 1.0;
};
struct BernoulliSymLaw {};
struct PointMassLaw {
  double a = 0.0;
};
struct StableLaw {
  double alpha = 1.0;
  double theta = 0.0;
};
struct BooleanPowerOf {
  double c = 1.0;
  MeasureSpecPtr inner;
};
struct DilationOf {
  double c = 1.0;
  MeasureSpecPtr inner;
};
struct BooleanShiftOf {
  double a = 0.0;
  MeasureSpecPtr inner;
};
struct TreeConvolutionOf {
  LazyTree tree;
  std::vector<MeasureSpecPtr> measures;  // one per letter
};

struct MeasureSpec {
  using Variant = std::variant<AtomicLaw, SemicircleLaw, ArcsineLaw, CauchyLaw, BernoulliSymLaw, PointMassLaw,
                               StableLaw, BooleanPowerOf, DilationOf, BooleanShiftOf, TreeConvolutionOf>;
  Variant law;

  static MeasureSpecPtr atomic(std::vector<double> weights, std::vector<double> atoms);
  static MeasureSpecPtr semicircle(double mean, double variance);
  static MeasureSpecPtr arcsine(double center, double radius);
  static MeasureSpecPtr cauchy(double location, double scale);
  static MeasureSpecPtr bernoulli_sym();
  static MeasureSpecPtr point_mass(double a);
  static MeasureSpecPtr stable(double alpha, double theta);
  static MeasureSpecPtr boolean_power(double c, MeasureSpecPtr inner);
  static MeasureSpecPtr dilate(double c, MeasureSpecPtr inner);
  static MeasureSpecPtr boolean_shift(double a, MeasureSpecPtr inner);
  static MeasureSpecPtr tree_convolution(LazyTree tree, std::vector<MeasureSpecPtr> measures);

  // Throws InvalidSpec when a parameter is out of range.
  void validate() const;
  std::string describe() const;
};

struct CompiledMeasure {
  KEvaluator k;
  std::function<Complex(Complex)> g;
};

CompiledMeasure compile_measure(const MeasureSpec& spec, const EngineOptions& options = {});
KEvaluator compile(const MeasureSpec& spec, const EngineOptions& options = {});

Complex cauchy_G(const MeasureSpec& spec, Complex z);
Complex f_transform(const MeasureSpec& spec, Complex z);
Complex k_transform(const MeasureSpec& spec, Complex z);

// Principal branches throughout; alpha = 2 gives the symmetric Bernoulli K = 1/z.
Complex stable_K(double alpha, double theta, Complex z);
Complex boolean_power_K(double c, const KEvaluator& inner, Complex z);
Complex dilate_K(double c, const KEvaluator& inner, Complex z);

KEvaluator stable_evaluator(double alpha, double theta);
KEvaluator boolean_power(double c, const KEvaluator& inner);
// Negative c uses the reflection K(conj w) = conj K(w).
KEvaluator dilate(double c, const KEvaluator& inner);
KEvaluator boolean_shift(double a, const KEvaluator& inner);

std::function<Complex(Complex)> g_from_k(const KEvaluator& k);

struct NevanlinnaOptions {
  double im_tol = 1e-10;
  double decay_tol = 1e-6;
  std::vector<double> ladder = {1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  std::vector<Complex> grid = default_grid();

  // 10 x 10 points: Re in [-5,5], Im from 1e-2 to 1e2.
  static std::vector<Complex> default_grid();
};

struct NevanlinnaReport {
  bool passed = true;
  double max_im = 0.0;
  double final_ratio = 0.0;
  std::vector<std::string> violations;
};

NevanlinnaReport nevanlinna_check(const KEvaluator& k, const NevanlinnaOptions& options = {});

}  // namespace treeconv
