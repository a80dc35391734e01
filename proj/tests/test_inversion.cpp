#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "treeconv/engine.hpp"
#include "treeconv/errors.hpp"
#include "treeconv/inversion.hpp"

using namespace treeconv;

namespace {

CauchyFunction g_of(const MeasureSpecPtr& s) { return compile_measure(*s).g; }

}  // namespace

TEST_CASE("grid") {
  CHECK(grid_size(-1, 1, 0.5) == 5);
  CHECK(grid_size(-8, 8, 0.1) == 161);
  CHECK_THROWS_AS(density(g_of(MeasureSpec::cauchy(0, 1)), 0, 1, 0.1, 0.0), Error);
  CHECK_THROWS_AS(density(g_of(MeasureSpec::cauchy(0, 1)), 0, 1, -0.1, 1e-3), Error);
}

TEST_CASE("density examples") {
  const double eps = 1e-3;
  const DensityGrid c = density(g_of(MeasureSpec::cauchy(0, 1)), 0, 0, 1, eps);
  CHECK(c.values[0] == doctest::Approx((1 + eps) / (M_PI * (1 + eps) * (1 + eps))).epsilon(1e-12));
  const DensityGrid s = density(g_of(MeasureSpec::semicircle(0, 1)), 0, 0, 1, 1e-6);
  CHECK(std::abs(s.values[0] - 1 / M_PI) < 1e-4);
  const TreeConvolution conv(LazyTree::free(2), {compile(*MeasureSpec::bernoulli_sym()), compile(*MeasureSpec::bernoulli_sym())});
  const DensityGrid a = density(g_from_k(conv.as_evaluator()), 0, 0, 1, 1e-6);
  CHECK(std::abs(a.values[0] - 1 / (2 * M_PI)) < 1e-3);
}

TEST_CASE("semicircle against its density") {
  const DensityGrid d = density(g_of(MeasureSpec::semicircle(0, 1)), -2.5, 2.5, 0.005, 1e-6);
  double sup = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::abs(d.x(i)) < 1.9) sup = std::max(sup, std::abs(d.values[i] - oracle::semicircle_density(1, d.x(i))));
  }
  CHECK(sup < 1e-4);
  const CdfGrid cdf = cdf_from_density(d);
  CHECK(std::abs(cdf.values.back() - 1) < 5e-3);
  const Moments m = moments(d, 2);
  CHECK(std::abs(m.values[0] - 1) < 5e-3);
  CHECK(std::abs(m.values[1]) < 5e-3);
  CHECK(std::abs(m.values[2] - 1) < 5e-3);
  CHECK_FALSE(m.mass_deficit);
}

TEST_CASE("cauchy mass") {
  const DensityGrid d = density(g_of(MeasureSpec::cauchy(0, 1)), -50, 50, 0.01, 1e-4);
  const double mass = cdf_from_density(d).values.back();
  CHECK(mass >= 0.98);
  CHECK(mass <= 1.0);
  // arctan closed form of the Lorentzian of width 1 + ε
  CHECK(mass == doctest::Approx(2 / M_PI * std::atan(50 / (1 + 1e-4))).epsilon(1e-6));
}

TEST_CASE("bernoulli moments") {
  const DensityGrid d = density(g_of(MeasureSpec::bernoulli_sym()), -3, 3, 1e-4, 1e-3);
  CHECK(std::abs(moments(d, 2).values[2] - 1) < 2e-2);
}

TEST_CASE("point mass") {
  const DensityGrid d = density(g_of(MeasureSpec::point_mass(0)), -1, 1, 1e-5, 1e-3);
  const Moments m = moments(d, 2);
  CHECK(m.values[0] == doctest::Approx(2 / M_PI * std::atan(1e3)).epsilon(1e-6));
  CHECK(std::abs(m.values[1]) < 1e-9);
}

TEST_CASE("levy distance") {
  CdfGrid a{-2, 0.01, {}}, b{-2, 0.01, {}}, c{-2, 0.01, {}};
  for (int i = 0; i <= 600; ++i) {
    const double x = -2 + i * 0.01;
    a.values.push_back(x >= -1e-9 ? 1.0 : 0.0);
    b.values.push_back(x >= 0.5 - 1e-9 ? 1.0 : 0.0);
    c.values.push_back(x >= 3 - 1e-9 ? 1.0 : 0.0);
  }
  CHECK(levy_distance(a, a) == 0.0);
  CHECK(levy_distance(a, b) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(levy_distance(a, c) == 1.0);
  CdfGrid d{-1, 0.01, a.values};
  CHECK_THROWS_AS(levy_distance(a, d), Error);
}

TEST_CASE("csv") {
  DensityGrid d;
  d.x_min = -0.5;
  d.step = 0.25;
  d.values = {0.1, 1.0 / 3, 0};
  std::ostringstream s;
  write_csv(s, d);
  CHECK(s.str() == "x,density\n-0.5,0.1\n-0.25,0.333333333333\n0,0\n");
}

TEST_CASE("threads do not change values") {
  const TreeConvolution conv(LazyTree::free(2), {compile(*MeasureSpec::stable(1.5, 0.3)), compile(*MeasureSpec::bernoulli_sym())});
  const auto g = g_from_k(conv.as_evaluator());
  const DensityGrid one = density(g, -3, 3, 0.05, 1e-4, "", 1);
  const DensityGrid four = density(g, -3, 3, 0.05, 1e-4, "", 4);
  CHECK(one.values == four.values);
}
