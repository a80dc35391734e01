#include "treeconv/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <sstream>

#include "treeconv/engine.hpp"
#include "treeconv/errors.hpp"

namespace treeconv {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

MeasureSpecPtr make(MeasureSpec::Variant law) {
  auto spec = std::make_shared<MeasureSpec>(MeasureSpec{std::move(law)});
  spec->validate();
  return spec;
}

// sqrt(w - a)·sqrt(w + a): analytic off [-a, a] and ~ w at infinity.
Complex radical(Complex w, double a) { return std::sqrt(w - a) * std::sqrt(w + a); }

}  // namespace

void require_upper_half_plane(Complex z, const char* where) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorKind::DomainError,
                std::string(where) + " needs Im z > 0, got " + num(z.real()) + (z.imag() < 0 ? "" : "+") +
                    num(z.imag()) + "i");
  }
}

KEvaluator::KEvaluator(Fn fn, std::string descriptor)
    : impl_(std::make_shared<const Impl>(Impl{std::move(fn), std::move(descriptor)})) {}

// ---------------------------------------------------------------------------
// Specs

MeasureSpecPtr MeasureSpec::atomic(std::vector<double> weights, std::vector<double> atoms) {
  return make(AtomicLaw{std::move(weights), std::move(atoms)});
}
MeasureSpecPtr MeasureSpec::semicircle(double mean, double variance) { return make(SemicircleLaw{mean, variance}); }
MeasureSpecPtr MeasureSpec::arcsine(double center, double radius) { return make(ArcsineLaw{center, radius}); }
MeasureSpecPtr MeasureSpec::cauchy(double location, double scale) { return make(CauchyLaw{location, scale}); }
MeasureSpecPtr MeasureSpec::bernoulli_sym() { return make(BernoulliSymLaw{}); }
MeasureSpecPtr MeasureSpec::point_mass(double a) { return make(PointMassLaw{a}); }
MeasureSpecPtr MeasureSpec::stable(double alpha, double theta) { return make(StableLaw{alpha, theta}); }
MeasureSpecPtr MeasureSpec::boolean_power(double c, MeasureSpecPtr inner) {
  return make(BooleanPowerOf{c, std::move(inner)});
}
MeasureSpecPtr MeasureSpec::dilate(double c, MeasureSpecPtr inner) { return make(DilationOf{c, std::move(inner)}); }
MeasureSpecPtr MeasureSpec::boolean_shift(double a, MeasureSpecPtr inner) {
  return make(BooleanShiftOf{a, std::move(inner)});
}
MeasureSpecPtr MeasureSpec::tree_convolution(LazyTree tree, std::vector<MeasureSpecPtr> measures) {
  return make(TreeConvolutionOf{std::move(tree), std::move(measures)});
}

void MeasureSpec::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); };
  auto finite = [&](double v, const char* name) {
    if (!std::isfinite(v)) bad(std::string(name) + " must be finite");
  };
  auto need_inner = [&](const MeasureSpecPtr& p) {
    if (!p) bad("missing inner measure");
  };
  std::visit(overloaded{
                 [&](const AtomicLaw& a) {
                   if (a.weights.empty() || a.weights.size() != a.atoms.size()) {
                     bad("atomic measure needs equally many weights and atoms");
                   }
                   double total = 0;
                   for (double w : a.weights) {
                     if (!(w > 0) || !std::isfinite(w)) bad("atomic weights must be positive");
                     total += w;
                   }
                   for (double t : a.atoms) finite(t, "atom");
                   if (std::abs(total - 1.0) > 1e-12) bad("atomic weights must sum to 1, got " + num(total));
                 },
                 [&](const SemicircleLaw& s) {
                   finite(s.mean, "mean");
                   if (!(s.variance > 0) || !std::isfinite(s.variance)) bad("semicircle variance must be positive");
                 },
                 [&](const ArcsineLaw& s) {
                   finite(s.center, "center");
                   if (!(s.radius > 0) || !std::isfinite(s.radius)) bad("arcsine radius must be positive");
                 },
                 [&](const CauchyLaw& s) {
                   finite(s.location, "location");
                   if (!(s.scale > 0) || !std::isfinite(s.scale)) bad("cauchy scale must be positive");
                 },
                 [&](const BernoulliSymLaw&) {},
                 [&](const PointMassLaw& s) { finite(s.a, "a"); },
                 [&](const StableLaw& s) {
                   if (!(s.alpha > 0 && s.alpha <= 2)) bad("stable alpha must lie in (0,2]");
                   if (!(s.theta >= -1 && s.theta <= 1)) bad("stable theta must lie in [-1,1]");
                 },
                 [&](const BooleanPowerOf& s) {
                   if (!(s.c >= 0) || !std::isfinite(s.c)) bad("boolean power needs c >= 0");
                   need_inner(s.inner);
                 },
                 [&](const DilationOf& s) {
                   finite(s.c, "c");
                   need_inner(s.inner);
                 },
                 [&](const BooleanShiftOf& s) {
                   finite(s.a, "a");
                   need_inner(s.inner);
                 },
                 [&](const TreeConvolutionOf& s) {
                   if (static_cast<int>(s.measures.size()) != s.tree.alphabet()) {
                     throw Error(ErrorKind::ArityMismatch,
                                 "tree convolution over [" + std::to_string(s.tree.alphabet()) + "] got " +
                                     std::to_string(s.measures.size()) + " measures");
                   }
                   for (const auto& m : s.measures) need_inner(m);
                 },
             },
             law);
}

std::string MeasureSpec::describe() const {
  return std::visit(
      overloaded{
          [](const AtomicLaw& a) { return "atomic(" + std::to_string(a.atoms.size()) + " atoms)"; },
          [](const SemicircleLaw& s) { return "semicircle(" + num(s.mean) + "," + num(s.variance) + ")"; },
          [](const ArcsineLaw& s) { return "arcsine(" + num(s.center) + "," + num(s.radius) + ")"; },
          [](const CauchyLaw& s) { return "cauchy(" + num(s.location) + "," + num(s.scale) + ")"; },
          [](const BernoulliSymLaw&) { return std::string("bernoulliSym"); },
          [](const PointMassLaw& s) { return "pointMass(" + num(s.a) + ")"; },
          [](const StableLaw& s) { return "stable(" + num(s.alpha) + "," + num(s.theta) + ")"; },
          [](const BooleanPowerOf& s) { return "booleanPower(" + num(s.c) + "," + s.inner->describe() + ")"; },
          [](const DilationOf& s) { return "dilate(" + num(s.c) + "," + s.inner->describe() + ")"; },
          [](const BooleanShiftOf& s) { return "booleanShift(" + num(s.a) + "," + s.inner->describe() + ")"; },
          [](const TreeConvolutionOf& s) {
            std::string out = "treeConvolution(" + s.tree.describe();
            for (std::size_t i = 0; i < s.measures.size(); ++i) {
              if (i > 0 && s.measures[i] == s.measures[i - 1]) continue;
              out += ";" + s.measures[i]->describe();
            }
            return out + ")";
          },
      },
      law);
}

// ---------------------------------------------------------------------------
// Closed forms

Complex stable_K(double alpha, double theta, Complex z) {
  if (alpha == 2.0) return 1.0 / z;
  const Complex w = -I * z;
  if (alpha == 1.0) return 2.0 * theta * std::log(w) - I * std::numbers::pi;
  const double t = std::tan(std::numbers::pi * alpha / 2.0);
  return -(I - theta * t) * std::pow(w, 1.0 - alpha);
}

Complex boolean_power_K(double c, const KEvaluator& inner, Complex z) {
  if (c == 0.0) return 0.0;
  return c * inner(z);
}

Complex dilate_K(double c, const KEvaluator& inner, Complex z) {
  if (c == 0.0) return 0.0;
  if (c > 0.0) return c * inner(z / c);
  return c * std::conj(inner(std::conj(z / c)));
}

KEvaluator stable_evaluator(double alpha, double theta) {
  if (alpha == 2.0) return KEvaluator([](Complex z) { return 1.0 / z; }, "bernoulliSym");
  return KEvaluator([alpha, theta](Complex z) { return stable_K(alpha, theta, z); },
                    "stable(" + num(alpha) + "," + num(theta) + ")");
}

KEvaluator boolean_power(double c, const KEvaluator& inner) {
  return KEvaluator([c, inner](Complex z) { return boolean_power_K(c, inner, z); },
                    "booleanPower(" + num(c) + "," + inner.descriptor() + ")");
}

KEvaluator dilate(double c, const KEvaluator& inner) {
  return KEvaluator([c, inner](Complex z) { return dilate_K(c, inner, z); },
                    "dilate(" + num(c) + "," + inner.descriptor() + ")");
}

KEvaluator boolean_shift(double a, const KEvaluator& inner) {
  return KEvaluator([a, inner](Complex z) { return inner(z) + a; },
                    "booleanShift(" + num(a) + "," + inner.descriptor() + ")");
}

std::function<Complex(Complex)> g_from_k(const KEvaluator& k) {
  return [k](Complex z) { return 1.0 / (z - k(z)); };
}

CompiledMeasure compile_measure(const MeasureSpec& spec, const EngineOptions& options) {
  spec.validate();
  const std::string desc = spec.describe();
  auto from_g = [&](std::function<Complex(Complex)> g) {
    return CompiledMeasure{KEvaluator([g](Complex z) { return z - 1.0 / g(z); }, desc), g};
  };
  auto from_k = [&](KEvaluator k) { return CompiledMeasure{k, g_from_k(k)}; };
  return std::visit(
      overloaded{
          [&](const AtomicLaw& a) {
            return from_g([a](Complex z) {
              Complex g = 0;
              for (std::size_t i = 0; i < a.atoms.size(); ++i) g += a.weights[i] / (z - a.atoms[i]);
              return g;
            });
          },
          [&](const SemicircleLaw& s) {
            const double v = s.variance;
            const double m = s.mean;
            const double edge = 2.0 * std::sqrt(v);
            auto g = [=](Complex z) { return 2.0 / (z - m + radical(z - m, edge)); };
            return CompiledMeasure{KEvaluator([=](Complex z) { return m + v * g(z); }, desc), g};
          },
          [&](const ArcsineLaw& s) {
            const double c = s.center;
            const double r = s.radius;
            auto g = [=](Complex z) { return 1.0 / radical(z - c, r); };
            return CompiledMeasure{KEvaluator([=](Complex z) { return z - radical(z - c, r); }, desc), g};
          },
          [&](const CauchyLaw& s) {
            const Complex k(s.location, -s.scale);
            return CompiledMeasure{KEvaluator([k](Complex) { return k; }, desc),
                                   [k](Complex z) { return 1.0 / (z - k); }};
          },
          [&](const BernoulliSymLaw&) {
            return CompiledMeasure{KEvaluator([](Complex z) { return 1.0 / z; }, desc),
                                   [](Complex z) { return z / (z * z - 1.0); }};
          },
          [&](const PointMassLaw& s) {
            const double a = s.a;
            return CompiledMeasure{KEvaluator([a](Complex) { return Complex(a, 0.0); }, desc),
                                   [a](Complex z) { return 1.0 / (z - a); }};
          },
          [&](const StableLaw& s) {
            if (s.alpha == 2.0) return compile_measure(*MeasureSpec::bernoulli_sym(), options);
            const double alpha = s.alpha;
            const double theta = s.theta;
            return from_k(KEvaluator([=](Complex z) { return stable_K(alpha, theta, z); }, desc));
          },
          [&](const BooleanPowerOf& s) {
            const KEvaluator inner = compile(*s.inner, options);
            const double c = s.c;
            return from_k(KEvaluator([=](Complex z) { return boolean_power_K(c, inner, z); }, desc));
          },
          [&](const DilationOf& s) {
            const KEvaluator inner = compile(*s.inner, options);
            const double c = s.c;
            return from_k(KEvaluator([=](Complex z) { return dilate_K(c, inner, z); }, desc));
          },
          [&](const BooleanShiftOf& s) {
            const KEvaluator inner = compile(*s.inner, options);
            const double a = s.a;
            return from_k(KEvaluator([=](Complex z) { return inner(z) + a; }, desc));
          },
          [&](const TreeConvolutionOf& s) {
            // Equal spec pointers compile to one shared evaluator.
            std::vector<KEvaluator> measures;
            std::vector<std::pair<const MeasureSpec*, KEvaluator>> seen;
            for (const auto& m : s.measures) {
              auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == m.get(); });
              if (it == seen.end()) {
                seen.emplace_back(m.get(), compile(*m, options));
                it = seen.end() - 1;
              }
              measures.push_back(it->second);
            }
            TreeConvolution conv(s.tree, std::move(measures), options);
            return from_k(conv.as_evaluator(desc));
          },
      },
      spec.law);
}

KEvaluator compile(const MeasureSpec& spec, const EngineOptions& options) {
  return compile_measure(spec, options).k;
}

Complex cauchy_G(const MeasureSpec& spec, Complex z) {
  require_upper_half_plane(z, "cauchy_G");
  return compile_measure(spec).g(z);
}

Complex f_transform(const MeasureSpec& spec, Complex z) {
  require_upper_half_plane(z, "f_transform");
  const Complex g = compile_measure(spec).g(z);
  if (g == 0.0) throw Error(ErrorKind::DomainError, "G vanished");
  return 1.0 / g;
}

Complex k_transform(const MeasureSpec& spec, Complex z) {
  require_upper_half_plane(z, "k_transform");
  return compile(spec)(z);
}

// ---------------------------------------------------------------------------

std::vector<Complex> NevanlinnaOptions::default_grid() {
  std::vector<Complex> grid;
  for (int a = 0; a < 10; ++a) {
    const double x = -5.0 + 10.0 * a / 9.0;
    for (int b = 0; b < 10; ++b) {
      const double y = std::pow(10.0, -2.0 + 4.0 * b / 9.0);
      grid.emplace_back(x, y);
    }
  }
  return grid;
}

NevanlinnaReport nevanlinna_check(const KEvaluator& k, const NevanlinnaOptions& options) {
  NevanlinnaReport report;
  report.max_im = -std::numeric_limits<double>::infinity();
  auto fail = [&](std::string what) {
    report.passed = false;
    if (report.violations.size() < 20) report.violations.push_back(std::move(what));
  };
  auto eval = [&](Complex z) -> std::optional<Complex> {
    try {
      const Complex v = k(z);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        fail("non-finite K at " + num(z.real()) + "+" + num(z.imag()) + "i");
        return std::nullopt;
      }
      return v;
    } catch (const Error& e) {
      fail(std::string("evaluation failed at ") + num(z.real()) + "+" + num(z.imag()) + "i: " + e.what());
      return std::nullopt;
    }
  };
  for (Complex z : options.grid) {
    auto v = eval(z);
    if (!v) continue;
    report.max_im = std::max(report.max_im, v->imag());
    if (v->imag() > options.im_tol) {
      fail("Im K = " + num(v->imag()) + " > 0 at " + num(z.real()) + "+" + num(z.imag()) + "i");
    }
  }
  double previous = std::numeric_limits<double>::infinity();
  for (double y : options.ladder) {
    auto v = eval(Complex(0.0, y));
    if (!v) continue;
    const double ratio = std::abs(*v) / y;
    if (ratio > previous * (1.0 + 1e-9) + 1e-15) {
      fail("|K(iy)/y| increases at y = " + num(y) + " (" + num(previous) + " -> " + num(ratio) + ")");
    }
    previous = ratio;
    report.final_ratio = ratio;
  }
  if (!options.ladder.empty() && report.final_ratio > options.decay_tol) {
    fail("|K(iy)/y| = " + num(report.final_ratio) + " exceeds " + num(options.decay_tol) + " at y = " +
         num(options.ladder.back()));
  }
  return report;
}

}  // namespace treeconv
