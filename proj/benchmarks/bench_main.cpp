#include <benchmark/benchmark.h>

#include "treeconv/engine.hpp"
#include "treeconv/inversion.hpp"
#include "treeconv/random.hpp"

using namespace treeconv;

namespace {

FiniteTree fig() { return FiniteTree::from_strings(3, {"", "1", "2", "3", "21", "31", "12", "13"}); }

void BM_FiniteConvolution(benchmark::State& state) {
  Rng rng(1);
  const FiniteTree tree = random_tree(rng, 3, static_cast<int>(state.range(0)), 0.7);
  const KEvaluator mu = compile(*MeasureSpec::bernoulli_sym());
  const std::vector<KEvaluator> ms(3, mu);
  const Complex z(0.3, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_K(tree, ms, z));
  state.SetLabel(std::to_string(tree.size()) + " vertices");
}
BENCHMARK(BM_FiniteConvolution)->DenseRange(2, 6, 2);

void BM_FreeClosure(benchmark::State& state) {
  const KEvaluator b = compile(*MeasureSpec::bernoulli_sym());
  const KEvaluator k = convolution_evaluator(LazyTree::free(2), {b, b});
  double x = -2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k(Complex(x, 1e-3)));
    x = x > 2 ? -2 : x + 0.01;
  }
}
BENCHMARK(BM_FreeClosure);

void BM_BpApproximant(benchmark::State& state) {
  const KEvaluator k = bp_limit(LazyTree::finite(fig()), stable_evaluator(1.7, 0.4), static_cast<int>(state.range(0)));
  double x = -2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k(Complex(x, 1e-3)));
    x = x > 2 ? -2 : x + 0.01;
  }
}
BENCHMARK(BM_BpApproximant)->DenseRange(2, 6, 2);

void BM_DensityGrid(benchmark::State& state) {
  const KEvaluator b = compile(*MeasureSpec::bernoulli_sym());
  const auto g = g_from_k(convolution_evaluator(LazyTree::free(2), {b, b}));
  for (auto _ : state) benchmark::DoNotOptimize(density(g, -3, 3, 0.01, 1e-4, "", static_cast<int>(state.range(0))));
}
BENCHMARK(BM_DensityGrid)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
