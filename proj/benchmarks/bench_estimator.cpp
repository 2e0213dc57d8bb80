#include <benchmark/benchmark.h>

#include <vector>

#include "trafoid/estimator.hpp"
#include "trafoid/model.hpp"
#include "trafoid/samples.hpp"

using namespace trafoid;

static void BM_KernelPartials(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto samples = simulate(registered_model("M1"), n, 1, Box{ { -0.25 }, { 1.25 } });
  const ConditionalCdfEstimator est(samples, KernelConfig{});
  const std::vector<double> x{ 0.5 };
  for (auto _ : state)
    benchmark::DoNotOptimize(est.partials(0.0, x, 0).lambda_tilde);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KernelPartials)->RangeMultiplier(4)->Range(500, 8000);

static void BM_EstimateLambda(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto samples = simulate(registered_model("M1"), n, 2, Box{ { -0.25 }, { 1.25 } });
  const auto w = unit_weight(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_lambda(samples, KernelConfig{}, w).y0);
}
BENCHMARK(BM_EstimateLambda)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
