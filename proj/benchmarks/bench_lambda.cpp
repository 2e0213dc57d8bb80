#include <benchmark/benchmark.h>

#include "trafoid/lambda.hpp"
#include "trafoid/model.hpp"

using namespace trafoid;

static void BM_OracleLambdaPoint(benchmark::State& state)
{
  const auto model = registered_model(state.range(0) ? "M3" : "M1");
  const auto w = unit_weight(1);
  const auto field = oracle_lambda_field(model, w);
  double y = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(field.lambda(y));
    y = y > 1.0 ? -1.0 : y + 0.013;
  }
}
BENCHMARK(BM_OracleLambdaPoint)->Arg(0)->Arg(1);

static void BM_OracleLambdaField(benchmark::State& state)
{
  const auto model = registered_model("M3");
  const auto w = unit_weight(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(oracle_lambda_field(model, w).y0);
}
BENCHMARK(BM_OracleLambdaField)->Unit(benchmark::kMillisecond);

static void BM_CoefficientsAB(benchmark::State& state)
{
  const auto model = registered_model("M1");
  const auto w = unit_weight(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(coefficients_AB(model, w).B);
}
BENCHMARK(BM_CoefficientsAB);
