// Acceptance suite: one PASS/FAIL line per criterion. With an argument, runs
// only that criterion; the exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "treeconv/engine.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/inversion.hpp"
#include "treeconv/random.hpp"

using namespace treeconv;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const std::vector<std::string> kFig = {"", "1", "2", "3", "21", "31", "12", "13"};

struct Atomic {
  std::vector<double> w, a;
  KEvaluator k;
  oracle::K ok;
};

Atomic random_measure(Rng& rng) {
  Atomic m;
  const int atoms = rng.integer(1, 4);
  double total = 0;
  for (int i = 0; i < atoms; ++i) {
    m.w.push_back(rng.uniform(0.1, 1.0));
    m.a.push_back(rng.uniform(-2, 2));
    total += m.w.back();
  }
  for (double& x : m.w) x /= total;
  m.k = compile(*MeasureSpec::atomic(m.w, m.a));
  m.ok = oracle::atomic_K(m.w, m.a);
  return m;
}

oracle::Complex F(const oracle::K& k, oracle::Complex z) { return z - k(z); }

Outcome exact_identities() {
  Rng rng(101);
  const FiniteTree boolean = FiniteTree::boolean(2);
  const FiniteTree orth = FiniteTree::orthogonal();
  const FiniteTree mono = FiniteTree::monotone(2);
  const FiniteTree id = FiniteTree::identity();
  const FiniteTree lam_orth_mono = compose(orth, {id, mono});  // λ⊢(μ▷ν)
  const FiniteTree orth_orth = compose(orth, {orth, id});      // (λ⊢μ)⊢ν
  const FiniteTree bool_orth = compose(orth, {boolean, id});   // (μ1⊎μ2)⊢ν
  double worst = 0;
  for (int p = 0; p < 20; ++p) {
    const Atomic l = random_measure(rng), m = random_measure(rng), n = random_measure(rng);
    const Complex z = random_point(rng);
    auto err = [&](Complex a, Complex b) { worst = std::max(worst, std::abs(a - b)); };
    err(convolve_K(boolean, {m.k, n.k}, z), m.ok(z) + n.ok(z));
    err(convolve_K(orth, {m.k, n.k}, z), m.ok(F(n.ok, z)));
    err(z - convolve_K(mono, {m.k, n.k}, z), F(m.ok, F(n.ok, z)));
    err(convolve_K(mono, {m.k, n.k}, z), convolve_K(orth, {m.k, n.k}, z) + n.k(z));
    const Complex assoc = l.ok(F(m.ok, F(n.ok, z)));
    err(convolve_K(lam_orth_mono, {l.k, m.k, n.k}, z), assoc);
    err(convolve_K(orth_orth, {l.k, m.k, n.k}, z), assoc);
    err(convolve_K(bool_orth, {l.k, m.k, n.k}, z), l.ok(F(n.ok, z)) + m.ok(F(n.ok, z)));
  }
  return {worst <= 1e-12, fmt("max error %.3g over 20 points (tol 1e-12)", worst)};
}

Outcome operad_compatibility() {
  Rng rng(102);
  double worst = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int k = rng.integer(1, 3);
    const FiniteTree outer = random_tree(rng, k, 3, 0.6);
    std::vector<FiniteTree> parts;
    std::vector<KEvaluator> all;
    std::vector<KEvaluator> inner;
    for (int j = 0; j < k; ++j) {
      parts.push_back(random_tree(rng, rng.integer(1, 3), 3, 0.6));
      std::vector<KEvaluator> ms;
      for (int i = 0; i < parts.back().alphabet(); ++i) ms.push_back(random_measure(rng).k);
      all.insert(all.end(), ms.begin(), ms.end());
      const FiniteTree part = parts.back();
      inner.emplace_back([part, ms](Complex z) { return convolve_K(part, ms, z); }, "part");
    }
    const FiniteTree composed = compose(outer, parts);
    for (int p = 0; p < 20; ++p) {
      const Complex z = random_point(rng);
      worst = std::max(worst, std::abs(convolve_K(composed, all, z) - convolve_K(outer, inner, z)));
    }
  }
  return {worst <= 1e-10, fmt("max K discrepancy %.3g over 50 instances x 20 points (tol 1e-10)", worst)};
}

Outcome branch_of_composition() {
  Rng rng(103);
  int failures = 0, checked = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int k = rng.integer(1, 3);
    const FiniteTree outer = random_tree(rng, k, 4, 0.5);
    std::vector<FiniteTree> parts;
    std::vector<LazyTree> lazy_parts;
    std::vector<oracle::WordSet> pw;
    std::vector<int> sizes;
    for (int j = 0; j < k; ++j) {
      parts.push_back(random_tree(rng, rng.integer(1, 3), 4, 0.5));
      lazy_parts.push_back(LazyTree::finite(parts.back()));
      pw.push_back(oracle::words(parts.back()));
      sizes.push_back(parts.back().alphabet());
    }
    const FiniteTree c = compose(outer, parts);
    const LazyTree lc = LazyTree::compose(LazyTree::finite(outer), lazy_parts);
    const oracle::WordSet ow = oracle::words(outer);
    int offset = 0;
    for (int j = 1; j <= k; ++j) {
      const int nj = sizes[static_cast<std::size_t>(j - 1)];
      // {s̃·ι_j(s′) : s̃ ∈ br_j(T)(T_1..T_k), s′ ∈ br_i(T_j)}
      const oracle::WordSet head = oracle::compose(oracle::branch(ow, j), pw, sizes);
      for (int i = 1; i <= nj; ++i) {
        oracle::WordSet expected;
        if (ow.count({j})) {
          for (const auto& s : head) {
            for (const auto& t : oracle::branch(pw[static_cast<std::size_t>(j - 1)], i)) {
              oracle::Word w = s;
              for (int x : t) w.push_back(x + offset);
              expected.insert(w);
            }
          }
          if (!pw[static_cast<std::size_t>(j - 1)].count({i})) expected.clear();
        }
        ++checked;
        auto fb = c.branch(offset + i);
        auto lb = lc.branch(offset + i);
        const oracle::WordSet got = fb ? oracle::words(*fb) : oracle::WordSet{};
        const oracle::WordSet lazy_got = lb ? oracle::words(lb->truncate(64)) : oracle::WordSet{};
        if (got != expected || lazy_got != expected) ++failures;
      }
      offset += nj;
    }
  }
  return {failures == 0, fmt("%.0f failures over %.0f branches of 100 compositions", failures, checked)};
}

Outcome nm_formulas() {
  Rng rng(104);
  int failures = 0, trees = 0, attempts = 0;
  while (trees < 100 && attempts < 10000) {
    ++attempts;
    const FiniteTree a = random_tree(rng, rng.integer(2, 3), 3, 0.6);
    const FiniteTree b = random_tree(rng, rng.integer(1, 3), 3, 0.6);
    if (a.n() <= 1) continue;
    ++trees;
    const oracle::WordSet ab = oracle::words(compose_same(a, b));
    if (oracle::root_degree(ab) != a.n() * b.n()) ++failures;
    if (oracle::max_children(ab) != a.m() * b.n() + b.m()) ++failures;
    const LazyTree lazy = LazyTree::finite(a);
    for (int k = 1; k <= 4; ++k) {
      const LazyTree ak = LazyTree::self_compose(lazy, k);
      long nk = 1;
      for (int i = 0; i < k; ++i) nk *= a.n();
      if (ak.n() != nk) ++failures;
      if (m_of(ak) != a.m() * (nk - 1) / (a.n() - 1)) ++failures;
      if (k <= 2) {
        const oracle::WordSet w = oracle::words(self_compose(a, k));
        if (oracle::root_degree(w) != nk || oracle::max_children(w) != a.m() * (nk - 1) / (a.n() - 1)) ++failures;
      }
    }
  }
  return {failures == 0 && trees == 100, fmt("%.0f mismatches over %.0f trees, k = 1..4", failures, trees)};
}

double sup_vs(const DensityGrid& d, const std::function<double(double)>& f, double lo, double hi) {
  double sup = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.x(i);
    if (x >= lo - 1e-12 && x <= hi + 1e-12) sup = std::max(sup, std::abs(d.values[i] - f(x)));
  }
  return sup;
}

Outcome free_oracle() {
  EngineOptions o;
  o.depth_cap = 60;
  const KEvaluator b = compile(*MeasureSpec::bernoulli_sym());
  const KEvaluator s = compile(*MeasureSpec::semicircle(0, 1));
  const TreeConvolution bb(LazyTree::free(2), {b, b}, o);
  const TreeConvolution ss(LazyTree::free(2), {s, s}, o);
  const DensityGrid db = density(g_from_k(bb.as_evaluator()), -1.9, 1.9, 0.05, 1e-6);
  const DensityGrid ds = density(g_from_k(ss.as_evaluator()), -1.9, 1.9, 0.05, 1e-6);
  const double eb = sup_vs(db, [](double x) { return oracle::arcsine_density(2, x); }, -1.9, 1.9);
  const double es = sup_vs(ds, [](double x) { return oracle::semicircle_density(2, x); }, -1.9, 1.9);
  const bool conv = bb.aggregate_report().converged && ss.aggregate_report().converged;
  return {eb <= 1e-3 && es <= 1e-3 && conv,
          fmt("arcsine sup error %.3g, semicircle(0,2) sup error %.3g (tol 1e-3)", eb, es)};
}

Outcome clt() {
  const KEvaluator nu2 = compile(*MeasureSpec::bernoulli_sym());
  const DensityGrid free8 = density(g_from_k(clt_scaled(LazyTree::free(2), nu2, 8)), -1.9, 1.9, 0.05, 1e-6);
  const double ef = sup_vs(free8, [](double x) { return oracle::semicircle_density(1, x); }, -1.9, 1.9);

  Rng rng(106);
  double eb = 0;
  const KEvaluator bool8 = clt_scaled(LazyTree::boolean(2), nu2, 8);
  for (int p = 0; p < 20; ++p) {
    const Complex z = random_point(rng);
    eb = std::max(eb, std::abs(bool8(z) - 1.0 / z));
  }

  // The monotone approximant is atomic (2^8 atoms), so it is compared with
  // the arcsine law smoothed at the same distance from the axis.
  const double eps = 0.1;
  const DensityGrid mono8 = density(g_from_k(clt_scaled(LazyTree::monotone(2), nu2, 8)), -1.9, 1.9, 0.05, eps);
  const double r = std::sqrt(2.0);
  const double em = sup_vs(mono8, [&](double x) { return -oracle::arcsine_G(r, Complex(x, eps)).imag() / M_PI; },
                           -1.9, 1.9);
  return {ef <= 2e-3 && eb <= 1e-12 && em <= 5e-3,
          fmt("free sup %.3g (tol 2e-3), boolean K %.3g (tol 1e-12), ", ef, eb) +
              fmt("monotone sup %.3g at eps 0.1 (tol 5e-3)", em)};
}

Outcome stable_scaling() {
  Rng rng(107);
  double worst = 0;
  for (double alpha : {0.5, 1.5}) {
    for (double theta : {0.0, 0.4, 0.8}) {
      for (double c : {0.5, 2.0}) {
        const KEvaluator nu = stable_evaluator(alpha, theta);
        const KEvaluator lhs = dilate(c, nu);
        const KEvaluator rhs = boolean_power(std::pow(c, alpha), nu);
        for (int p = 0; p < 20; ++p) {
          const Complex z = random_point(rng);
          worst = std::max(worst, std::abs(lhs(z) - rhs(z)));
        }
      }
    }
  }
  return {worst <= 1e-12, fmt("max K error %.3g over 12 parameter sets x 20 points (tol 1e-12)", worst)};
}

LazyTree fig_tree() { return LazyTree::finite(FiniteTree::from_strings(3, kFig)); }

Outcome bp_cauchy() {
  const KEvaluator mu = stable_evaluator(1.7, 0.4);
  // Lévy distances are lattice-valued, so a fine grid keeps them resolved.
  const double lo = -8, hi = 8, step = 1e-3, eps = 1e-5;
  std::vector<CdfGrid> cdf;
  std::vector<DensityGrid> dens;
  for (int k = 4; k <= 7; ++k) {
    const DensityGrid d = density(g_from_k(bp_limit(fig_tree(), mu, k)), lo, hi, step, eps, "",
                                  std::max(1u, std::thread::hardware_concurrency()));
    cdf.push_back(cdf_from_density(d));
    dens.push_back(d);
  }
  const double d45 = levy_distance(cdf[0], cdf[1]);
  const double d56 = levy_distance(cdf[1], cdf[2]);
  const double sup67 = sup_difference(dens[2], dens[3]);
  return {d56 <= 2 * d45 && sup67 <= 1e-3,
          fmt("d_L(4,5) %.4g, d_L(5,6) %.4g (need <= 2x), ", d45, d56) +
              fmt("sup |f7 - f6| %.3g (tol 1e-3)", sup67)};
}

Outcome pipeline() {
  bool ok = true;
  std::ostringstream detail;
  for (double alpha : {1.7, 1.2}) {
    for (double theta : {0.0, 0.4, 0.8}) {
      const KEvaluator k = bp_limit(fig_tree(), stable_evaluator(alpha, theta), 6);
      const auto g = g_from_k(k);
      double min_raw = INFINITY;
      for (int i = 0; i <= 160; ++i) {
        const double x = -8 + 0.1 * i;
        min_raw = std::min(min_raw, -g(Complex(x, 1e-5)).imag() / M_PI);
      }
      const DensityGrid d = density(g, -8, 8, 0.1, 1e-5);
      double trap = 0;
      for (std::size_t i = 1; i < d.size(); ++i) trap += 0.05 * (d.values[i] + d.values[i - 1]);
      const bool nonneg = min_raw >= -1e-12;
      const bool mass_ok = alpha != 1.7 || trap >= 0.97;
      ok = ok && nonneg && mass_ok;
      detail << fmt("(%.1f,%.1f) min %.2g ", alpha, theta, min_raw) << fmt("mass %.4g; ", trap);
    }
  }
  return {ok, detail.str()};
}

Outcome nevanlinna_gate() {
  const KEvaluator b = compile(*MeasureSpec::bernoulli_sym());
  const KEvaluator s = compile(*MeasureSpec::semicircle(0, 1));
  const KEvaluator st = stable_evaluator(1.7, 0.4);
  Rng rng(110);
  const KEvaluator a1 = dilate(0.5, compile(*random_atomic(rng))), a2 = dilate(0.5, compile(*random_atomic(rng)));
  std::vector<std::pair<std::string, KEvaluator>> outputs = {
      {"free bernoulli", convolution_evaluator(LazyTree::free(2), {b, b})},
      {"free semicircle", convolution_evaluator(LazyTree::free(2), {s, s})},
      {"subordination", convolution_evaluator(LazyTree::subordination(), {a1, a2})},
      {"monotone", convolution_evaluator(LazyTree::monotone(3), {a1, a2, b})},
      {"finite", convolution_evaluator(fig_tree(), {a1, a2, st})},
      {"free clt", clt_scaled(LazyTree::free(2), b, 8)},
      {"monotone clt", clt_scaled(LazyTree::monotone(2), b, 8)},
      {"boolean clt", clt_scaled(LazyTree::boolean(2), b, 8)},
      {"phi", phi_N(fig_tree(), 0.5, st)},
  };
  for (double alpha : {1.7, 1.2}) {
    for (double theta : {0.0, 0.4, 0.8}) {
      outputs.emplace_back(fmt("bp(%.1f,%.1f)", alpha, theta), bp_limit(fig_tree(), stable_evaluator(alpha, theta), 6));
    }
  }
  for (int k = 4; k <= 7; ++k) outputs.emplace_back(fmt("bp k=%.0f", k), bp_limit(fig_tree(), st, k));
  std::string failed;
  for (const auto& [name, k] : outputs) {
    const NevanlinnaReport r = nevanlinna_check(k);
    if (!r.passed) failed += name + " ";
  }
  return {failed.empty(), failed.empty() ? fmt("%.0f engine outputs pass", outputs.size()) : "failed: " + failed};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exact identities", exact_identities},
      {"operad compatibility", operad_compatibility},
      {"branch of a composition", branch_of_composition},
      {"n/m of compositions", nm_formulas},
      {"free oracles", free_oracle},
      {"central limits", clt},
      {"stable scaling", stable_scaling},
      {"approximant convergence", bp_cauchy},
      {"density pipeline", pipeline},
      {"Nevanlinna gate", nevanlinna_gate},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.2fs]\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    all = all && o.passed;
  }
  return all ? 0 : 1;
}
