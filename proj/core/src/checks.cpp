#include "treeconv/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "treeconv/engine.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/random.hpp"

namespace treeconv {

namespace {

class Suite {
 public:
  Suite(std::string name, std::uint64_t seed, std::string fault) : fault_(std::move(fault)) {
    report_.suite = std::move(name);
    report_.seed = seed;
  }

  // Runs `body` (returning the max error over its instances) and records it.
  void check(const std::string& identity, double tolerance, int instances, const std::function<double()>& body) {
    CheckResult r;
    r.identity = identity;
    r.tolerance = tolerance;
    r.instances = instances;
    try {
      r.max_error = body();
      if (!fault_.empty() && identity.rfind(fault_, 0) == 0) r.max_error += 1e-3;
      r.passed = r.max_error <= tolerance;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = e.what();
      r.max_error = INFINITY;
    }
    report_.passed = report_.passed && r.passed;
    report_.checks.push_back(std::move(r));
  }

  SuiteReport finish() { return std::move(report_); }

 private:
  std::string fault_;
  SuiteReport report_;
};

using Fn = std::function<Complex(Complex)>;

KEvaluator finite_convolution(const FiniteTree& t, const std::vector<KEvaluator>& ms) {
  return KEvaluator([t, ms](Complex z) { return convolve_K(t, ms, z); }, "finite convolution");
}

Complex F(const KEvaluator& k, Complex z) { return z - k(z); }

std::vector<MeasureSpecPtr> builtin_specs() {
  return {
      MeasureSpec::bernoulli_sym(),
      MeasureSpec::point_mass(0.7),
      MeasureSpec::atomic({0.2, 0.5, 0.3}, {-1.5, 0.25, 2.0}),
      MeasureSpec::semicircle(0.5, 2.0),
      MeasureSpec::arcsine(-0.3, 1.5),
      MeasureSpec::cauchy(0.4, 0.8),
      MeasureSpec::stable(0.5, 0.4),
      MeasureSpec::stable(1.0, -0.6),
      MeasureSpec::stable(1.5, 0.8),
      MeasureSpec::stable(2.0, 0.3),
      MeasureSpec::boolean_power(0.3, MeasureSpec::semicircle(0.0, 1.0)),
      MeasureSpec::dilate(-1.7, MeasureSpec::stable(1.2, 0.4)),
      MeasureSpec::boolean_shift(0.6, MeasureSpec::bernoulli_sym()),
  };
}

void transforms_suite(Suite& suite, Rng& rng) {
  const auto specs = builtin_specs();
  std::vector<Complex> points;
  for (int i = 0; i < 20; ++i) points.push_back(random_point(rng));

  suite.check("boolean power scales K", 1e-12, static_cast<int>(specs.size()), [&] {
    double err = 0;
    for (const auto& s : specs) {
      const double c = rng.uniform(0.0, 3.0);
      const KEvaluator k = compile(*s);
      const KEvaluator kc = compile(*MeasureSpec::boolean_power(c, s));
      for (Complex z : points) err = std::max(err, std::abs(kc(z) - c * k(z)) / (1.0 + std::abs(k(z))));
    }
    return err;
  });

  suite.check("dilation round trip", 1e-12, static_cast<int>(specs.size()), [&] {
    double err = 0;
    for (const auto& s : specs) {
      double c = rng.uniform(0.3, 3.0);
      if (rng.chance(0.5)) c = -c;
      const KEvaluator k = compile(*s);
      const KEvaluator back = compile(*MeasureSpec::dilate(1.0 / c, MeasureSpec::dilate(c, s)));
      for (Complex z : points) err = std::max(err, std::abs(back(z) - k(z)) / (1.0 + std::abs(k(z))));
    }
    return err;
  });

  suite.check("Herglotz signs of G, F, K", 1e-12, static_cast<int>(specs.size()), [&] {
    double err = 0;
    for (const auto& s : specs) {
      const CompiledMeasure m = compile_measure(*s);
      for (Complex z : points) {
        const Complex g = m.g(z);
        const Complex k = m.k(z);
        err = std::max(err, std::max(0.0, g.imag()) / (1.0 + std::abs(g)));
        err = std::max(err, std::max(0.0, z.imag() - (1.0 / g).imag()) / (1.0 + std::abs(z)));
        err = std::max(err, std::max(0.0, k.imag()) / (1.0 + std::abs(k)));
      }
    }
    return err;
  });

  suite.check("atomic closed forms", 1e-12, 3, [&] {
    double err = 0;
    const double c = rng.uniform(0.2, 2.0);
    const double root = std::sqrt(c);
    const std::vector<std::pair<MeasureSpecPtr, MeasureSpecPtr>> pairs = {
        {MeasureSpec::bernoulli_sym(), MeasureSpec::atomic({0.5, 0.5}, {-1.0, 1.0})},
        {MeasureSpec::dilate(2.0, MeasureSpec::bernoulli_sym()), MeasureSpec::atomic({0.5, 0.5}, {-2.0, 2.0})},
        {MeasureSpec::boolean_power(c, MeasureSpec::bernoulli_sym()), MeasureSpec::atomic({0.5, 0.5}, {-root, root})},
    };
    for (const auto& [a, b] : pairs) {
      const auto ga = compile_measure(*a).g;
      const auto gb = compile_measure(*b).g;
      for (Complex z : points) err = std::max(err, std::abs(ga(z) - gb(z)));
    }
    return err;
  });

  suite.check("stable scaling c·ν = ν^{⊎c^α}", 1e-12, 12, [&] {
    double err = 0;
    for (double alpha : {0.5, 1.5}) {
      for (double theta : {0.0, 0.4, 0.8}) {
        for (double c : {0.5, 2.0}) {
          const KEvaluator nu = stable_evaluator(alpha, theta);
          for (Complex z : points) {
            const Complex lhs = dilate_K(c, nu, z);
            const Complex rhs = std::pow(c, alpha) * nu(z);
            err = std::max(err, std::abs(lhs - rhs));
          }
        }
      }
    }
    return err;
  });
}

void operad_suite(Suite& suite, Rng& rng) {
  const int trials = 10;
  auto atomics = [&](int n) {
    std::vector<KEvaluator> ms;
    for (int i = 0; i < n; ++i) ms.push_back(compile(*random_atomic(rng)));
    return ms;
  };

  suite.check("boolean K-additivity", 1e-12, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials; ++t) {
      const int n = rng.integer(1, 4);
      const auto ms = atomics(n);
      const Complex z = random_point(rng);
      Complex sum = 0;
      for (const auto& m : ms) sum += m(z);
      err = std::max(err, std::abs(convolve_K(FiniteTree::boolean(n), ms, z) - sum));
    }
    return err;
  });

  suite.check("orthogonal K = K_1∘F_2", 1e-12, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials; ++t) {
      const auto ms = atomics(2);
      const Complex z = random_point(rng);
      err = std::max(err, std::abs(convolve_K(FiniteTree::orthogonal(), ms, z) - ms[0](F(ms[1], z))));
    }
    return err;
  });

  suite.check("monotone F = F_1∘F_2", 1e-12, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials; ++t) {
      const auto ms = atomics(2);
      const Complex z = random_point(rng);
      const Complex f = z - convolve_K(FiniteTree::monotone(2), ms, z);
      err = std::max(err, std::abs(f - F(ms[0], F(ms[1], z))));
    }
    return err;
  });

  suite.check("monotone decomposition (μ⊢ν)⊎ν", 1e-12, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials; ++t) {
      const auto ms = atomics(2);
      const Complex z = random_point(rng);
      const Complex lhs = convolve_K(FiniteTree::monotone(2), ms, z);
      const Complex rhs = convolve_K(FiniteTree::orthogonal(), ms, z) + ms[1](z);
      err = std::max(err, std::abs(lhs - rhs));
    }
    return err;
  });

  suite.check("associativity λ⊢(μ⊳ν) = (λ⊢μ)⊢ν", 1e-12, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials; ++t) {
      const auto ms = atomics(3);
      const Complex z = random_point(rng);
      const KEvaluator mono = finite_convolution(FiniteTree::monotone(2), {ms[1], ms[2]});
      const KEvaluator orth = finite_convolution(FiniteTree::orthogonal(), {ms[0], ms[1]});
      const Complex lhs = convolve_K(FiniteTree::orthogonal(), {ms[0], mono}, z);
      const Complex rhs = convolve_K(FiniteTree::orthogonal(), {orth, ms[2]}, z);
      err = std::max(err, std::abs(lhs - rhs));
    }
    return err;
  });

  suite.check("(⊎μ_j)⊢ν = ⊎(μ_j⊢ν)", 1e-12, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials; ++t) {
      const int n = rng.integer(2, 3);
      const auto ms = atomics(n);
      const KEvaluator nu = compile(*random_atomic(rng));
      const Complex z = random_point(rng);
      const KEvaluator sum = finite_convolution(FiniteTree::boolean(n), ms);
      const Complex lhs = convolve_K(FiniteTree::orthogonal(), {sum, nu}, z);
      Complex rhs = 0;
      for (const auto& m : ms) rhs += convolve_K(FiniteTree::orthogonal(), {m, nu}, z);
      err = std::max(err, std::abs(lhs - rhs));
    }
    return err;
  });

  suite.check("operad compatibility", 1e-10, trials, [&] {
    double err = 0;
    for (int t = 0; t < trials;) {
      const int k = rng.integer(1, 3);
      const FiniteTree outer = random_tree(rng, k, 3, 0.6);
      std::vector<FiniteTree> parts;
      for (int j = 0; j < k; ++j) parts.push_back(random_tree(rng, rng.integer(1, 3), 3, 0.6));
      std::optional<FiniteTree> composed;
      try {
        composed = compose(outer, parts, 20000);
      } catch (const Error&) {
        continue;
      }
      ++t;
      std::vector<KEvaluator> all;
      std::vector<KEvaluator> inner;
      for (const auto& p : parts) {
        const auto ms = atomics(p.alphabet());
        all.insert(all.end(), ms.begin(), ms.end());
        inner.push_back(finite_convolution(p, ms));
      }
      for (int i = 0; i < 5; ++i) {
        const Complex z = random_point(rng);
        err = std::max(err, std::abs(convolve_K(*composed, all, z) - convolve_K(outer, inner, z)));
      }
    }
    return err;
  });

  suite.check("branch of a composition", 0.0, trials, [&] {
    double mismatches = 0;
    for (int t = 0; t < trials;) {
      const int k = rng.integer(1, 3);
      const FiniteTree outer = random_tree(rng, k, 4, 0.5);
      std::vector<FiniteTree> parts;
      std::vector<int> offset{0};
      for (int j = 0; j < k; ++j) {
        parts.push_back(random_tree(rng, rng.integer(1, 3), 4, 0.5));
        offset.push_back(offset.back() + parts.back().alphabet());
      }
      std::optional<FiniteTree> composed;
      try {
        composed = compose(outer, parts, 20000);
      } catch (const Error&) {
        continue;
      }
      ++t;
      for (int j : outer.root_letters()) {
        const FiniteTree head = compose(*outer.branch(j), parts);
        for (int i : parts[j - 1].root_letters()) {
          std::set<Word> expected;
          for (const Word& a : head.vertices()) {
            for (Word b : parts[j - 1].branch(i)->vertices()) {
              Word w = a;
              for (int& l : b) l += offset[j - 1];
              w.insert(w.end(), b.begin(), b.end());
              expected.insert(w);
            }
          }
          const auto got = composed->branch(offset[j - 1] + i)->vertices();
          if (std::set<Word>(got.begin(), got.end()) != expected) mismatches += 1;
        }
      }
    }
    return mismatches;
  });

  suite.check("n and m of compositions", 0.0, trials, [&] {
    double mismatches = 0;
    for (int t = 0; t < trials;) {
      const FiniteTree a = random_tree(rng, rng.integer(1, 3), 3, 0.6);
      const FiniteTree b = random_tree(rng, rng.integer(1, 3), 3, 0.6);
      if (a.n() == 0) continue;
      std::optional<FiniteTree> ab;
      try {
        ab = compose_same(a, b);
      } catch (const Error&) {
        continue;
      }
      ++t;
      if (ab->n() != a.n() * b.n()) mismatches += 1;
      if (ab->m() != a.m() * b.n() + b.m()) mismatches += 1;
    }
    return mismatches;
  });

  suite.check("n and m of self-compositions", 0.0, trials, [&] {
    double mismatches = 0;
    for (int t = 0; t < trials;) {
      const FiniteTree a = random_tree(rng, rng.integer(2, 3), 2, 0.6);
      if (a.n() <= 1) continue;
      const int k = rng.integer(1, 4);
      std::optional<FiniteTree> ak;
      try {
        ak = self_compose(a, k);
      } catch (const Error&) {
        continue;
      }
      ++t;
      long nk = 1;
      for (int i = 0; i < k; ++i) nk *= a.n();
      if (ak->n() != nk) mismatches += 1;
      if (ak->m() != a.m() * (nk - 1) / (a.n() - 1)) mismatches += 1;
    }
    return mismatches;
  });
}

void nevanlinna_suite(Suite& suite, Rng& rng) {
  NevanlinnaOptions options;
  options.ladder = {1e2, 1e4, 1e6, 1e8, 1e10, 1e12};
  options.decay_tol = 1e-5;
  for (const auto& s : builtin_specs()) {
    suite.check("Nevanlinna " + s->describe(), 0.0, 1, [&] {
      const NevanlinnaReport r = nevanlinna_check(compile(*s), options);
      return r.passed ? 0.0 : 1.0;
    });
  }
  const KEvaluator b = compile(*MeasureSpec::bernoulli_sym());
  const KEvaluator a = compile(*random_atomic(rng));
  const std::vector<std::pair<std::string, KEvaluator>> outputs = {
      {"free convolution", convolution_evaluator(LazyTree::free(2), {b, a})},
      {"monotone convolution", convolution_evaluator(LazyTree::monotone(3), {a, b, a})},
      {"BP approximant", bp_limit(LazyTree::finite(FiniteTree::from_strings(3, {"", "1", "2", "3", "21", "31", "12", "13"})),
                                  compile(*MeasureSpec::stable(1.5, 0.4)), 2)},
      {"phi map", phi_N(LazyTree::free(2), 0.5, b)},
  };
  for (const auto& [name, k] : outputs) {
    suite.check("Nevanlinna " + name, 0.0, 1, [&] {
      const NevanlinnaReport r = nevanlinna_check(k, options);
      return r.passed ? 0.0 : 1.0;
    });
  }
}

}  // namespace

std::vector<std::string> suite_names() { return {"transforms", "operad", "nevanlinna"}; }

SuiteReport run_suite(const std::string& name, std::uint64_t seed, const std::string& fault) {
  Suite suite(name, seed, fault);
  Rng rng(seed);
  if (name == "transforms") {
    transforms_suite(suite, rng);
  } else if (name == "operad") {
    operad_suite(suite, rng);
  } else if (name == "nevanlinna") {
    nevanlinna_suite(suite, rng);
  } else {
    throw Error(ErrorKind::InvalidSpec, "unknown suite \"" + name + "\"");
  }
  return suite.finish();
}

nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json j{{"identity", c.identity},
                     {"passed", c.passed},
                     {"tolerance", c.tolerance},
                     {"instances", c.instances}};
    j["max_error"] = std::isfinite(c.max_error) ? nlohmann::json(c.max_error) : nlohmann::json(nullptr);
    if (!c.detail.empty()) j["detail"] = c.detail;
    checks.push_back(std::move(j));
  }
  return {{"suite", report.suite}, {"seed", report.seed}, {"passed", report.passed}, {"checks", checks}};
}

}  // namespace treeconv
