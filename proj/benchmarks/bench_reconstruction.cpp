#include <benchmark/benchmark.h>

#include <cmath>

#include "trafoid/lambda.hpp"
#include "trafoid/reconstruction.hpp"

using namespace trafoid;

namespace {

double m3_lambda(double y)
{
  return -(0.5 + std::sinh(y)) / std::cosh(y);
}

} // namespace

static void BM_ReconstructGlobal(benchmark::State& state)
{
  const double y0 = std::asinh(-0.5);
  const auto grid = centered_grid(y0, 1.5, static_cast<std::size_t>(state.range(0)));
  const Identification id{ y0, 0.0, 1.0 };
  for (auto _ : state)
    benchmark::DoNotOptimize(reconstruct_global(m3_lambda, id, { y0 + 1.0, 1.0 }, grid).alpha2);
}
BENCHMARK(BM_ReconstructGlobal)->Arg(101)->Arg(401)->Arg(1601)->Unit(benchmark::kMillisecond);

static void BM_Alpha2Limit(benchmark::State& state)
{
  const double y0 = std::asinh(-0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(alpha2_limit(m3_lambda, { y0, 0.0, 1.0 }, y0 + 1.0, y0 - 1.0, 1.0).value);
}
BENCHMARK(BM_Alpha2Limit)->Unit(benchmark::kMicrosecond);
