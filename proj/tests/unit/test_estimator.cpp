#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "trafoid/error.hpp"
#include "trafoid/estimator.hpp"
#include "trafoid/lambda.hpp"
#include "trafoid/model.hpp"
#include "trafoid/reconstruction.hpp"
#include "trafoid/samples.hpp"

using namespace trafoid;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Box unit_box{ { 0.0 }, { 1.0 } };
// covariates drawn past the weight box, as in the Monte Carlo plan
const Box wide_box{ { -0.25 }, { 1.25 } };

// pointwise x-partials need the wider covariate bandwidth of the sign diagnostic
KernelConfig partial_kernel()
{
  KernelConfig k;
  k.cx = 3.0;
  return k;
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

} // namespace

TEST_CASE("rule-of-thumb bandwidths", "[estimator]")
{
  const std::vector<double> v{ 1.0, 2.0, 3.0, 4.0, 5.0 };
  const double s = std::sqrt(2.5);
  CHECK_THAT(rule_of_thumb(v, 1.0, 1), WithinRel(s * std::pow(5.0, -0.2), 1e-14));
  CHECK_THAT(rule_of_thumb(v, 2.0, 2), WithinRel(2.0 * s * std::pow(5.0, -1.0 / 6.0), 1e-14));
  const std::vector<double> flat{ 1.0, 1.0, 1.0 };
  CHECK_THROWS_AS(rule_of_thumb(flat, 1.0, 1), ConfigError);

  const SampleSet s2(1, { 0.0, 1.0, 2.0 }, { 0.0, 0.5, 1.0 });
  KernelConfig k;
  k.bandwidth_x = { 0.2 };
  k.bandwidth_y = 0.3;
  const auto bw = resolve_bandwidths(s2, k);
  CHECK(bw.x == std::vector<double>{ 0.2 });
  CHECK(bw.y == 0.3);
  k.cx = 0.0;
  CHECK_THROWS_AS(resolve_bandwidths(s2, k), ConfigError);
}

TEST_CASE("conditional CDF limits on a single point", "[estimator]")
{
  const SampleSet one(1, { 0.0 }, { 0.0 });
  const ConditionalCdfEstimator est(one, Bandwidths{ { 0.1 }, 0.2 }, 0.0);
  const std::vector<double> x{ 0.0 };
  CHECK(est.cdf(100.0, x) == 1.0);
  CHECK(est.cdf(-10.0 * 0.2 - 1e-9, x) <= 1e-8);
  CHECK(est.cdf(0.0, x) == 0.5);

  // the default floor refuses a single point
  const ConditionalCdfEstimator strict(one, Bandwidths{ { 0.1 }, 0.2 });
  CHECK_THROWS_AS(strict.cdf(0.0, x), ConfigError);
}

TEST_CASE("density estimate is positive between two points", "[estimator]")
{
  const SampleSet two(1, { -0.5, 0.5 }, { -0.1, 0.1 });
  const ConditionalCdfEstimator est(two, Bandwidths{ { 0.3 }, 0.4 }, 0.0);
  const std::vector<double> x{ 0.0 };
  const auto p = est.partials(0.0, x, 0);
  CHECK(p.dF_dy > 0.0);
  CHECK(std::isfinite(p.dF_dxi));
  // far from both points the density underflows
  CHECK_THROWS_AS(est.partials(50.0, x, 0), IdentificationError);
}

TEST_CASE("analytic partials match finite differences of the smoother", "[estimator]")
{
  const auto s = simulate(registered_model("M1"), 400, 3, unit_box);
  const ConditionalCdfEstimator est(s, KernelConfig{});
  const double step = 1e-6;
  for (double y : { -0.6, 0.1, 0.9 })
    for (double xv : { 0.3, 0.6 }) {
      const std::vector<double> x{ xv };
      const std::vector<double> xp{ xv + step };
      const std::vector<double> xm{ xv - step };
      const auto p = est.partials(y, x, 0);
      CHECK_THAT(p.dF_dy, WithinAbs((est.cdf(y + step, x) - est.cdf(y - step, x)) / (2 * step), 1e-6));
      CHECK_THAT(p.dF_dxi, WithinAbs((est.cdf(y, xp) - est.cdf(y, xm)) / (2 * step), 1e-6));
      CHECK(p.lambda_tilde_se > 0.0);
    }
}

TEST_CASE("estimated CDF is monotone in y", "[estimator]")
{
  const auto s = simulate(registered_model("M1"), 2000, 9, unit_box);
  const ConditionalCdfEstimator est(s, KernelConfig{});
  for (double xv : { 0.1, 0.5, 0.9 }) {
    const std::vector<double> x{ xv };
    double last = 0.0;
    for (double y = -4.0; y <= 4.0; y += 0.05) {
      const double F = est.cdf(y, x);
      CHECK(F >= last);
      last = F;
    }
  }
}

TEST_CASE("kernel CDF and partials against the oracle, n = 5000", "[estimator][statistical]")
{
  const auto m1 = registered_model("M1");
  const std::vector<double> x{ 0.5 };
  const double F = cond_cdf(m1, 0.0, x);
  const double Fx = cond_cdf_dxi(m1, 0.0, x, 0);
  int cdf_close = 0;
  int sign_ok = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto s = simulate(m1, 5000, mix_seed(101, rep), wide_box);
    cdf_close += std::abs(ConditionalCdfEstimator(s, KernelConfig{}).cdf(0.0, x) - F) < 0.05;
    sign_ok += (ConditionalCdfEstimator(s, partial_kernel()).partials(0.0, x, 0).dF_dxi < 0.0) == (Fx < 0.0);
  }
  CHECK(cdf_close >= 45);
  CHECK(sign_ok >= 45);
}

TEST_CASE("partial estimates converge along n", "[estimator][statistical]")
{
  const auto m1 = registered_model("M1");
  const std::vector<double> x{ 0.5 };
  const double Fy = cond_cdf_dy(m1, 0.0, x);
  const double Fx = cond_cdf_dxi(m1, 0.0, x, 0);
  std::vector<double> med_y;
  std::vector<double> med_x;
  for (std::size_t n : { 500u, 2000u, 8000u }) {
    std::vector<double> ey;
    std::vector<double> ex;
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
      const auto s = simulate(m1, n, mix_seed(n, rep), wide_box);
      const auto p = ConditionalCdfEstimator(s, partial_kernel()).partials(0.0, x, 0);
      ey.push_back(std::abs(p.dF_dy - Fy));
      ex.push_back(std::abs(p.dF_dxi - Fx));
    }
    med_y.push_back(median(ey));
    med_x.push_back(median(ex));
  }
  CHECK(med_y[2] < med_y[1]);
  CHECK(med_y[1] < med_y[0]);
  CHECK(med_x[2] < med_x[1]);
  CHECK(med_x[1] < med_x[0]);
}

TEST_CASE("lambda-hat root and slope for M1, n = 8000", "[estimator][statistical]")
{
  const auto m1 = registered_model("M1");
  const auto w = unit_weight(1);
  std::vector<double> y0_err;
  std::vector<double> b_err;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto s = simulate(m1, 8000, mix_seed(2024, rep), wide_box);
    const auto est = estimate_lambda(s, KernelConfig{}, w);
    y0_err.push_back(std::abs(est.y0 + 0.5));
    b_err.push_back(std::abs(est.B - 1.0));
    REQUIRE(est.grid.size() == 121);
    CHECK_THAT(est(est.y0), WithinAbs(0.0, 1e-12));
  }
  CHECK(median(y0_err) < 0.1);
  CHECK(median(b_err) < 0.2);
}

TEST_CASE("homoscedastic samples are not identified", "[estimator][statistical]")
{
  const auto m2 = registered_model("M2");
  const auto w = unit_weight(1);
  int not_identified = 0;
  int consistent = 0;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto s = simulate(m2, 2000, mix_seed(55, rep), wide_box);
    try {
      (void)estimate_lambda(s, KernelConfig{}, w);
    } catch (const IdentificationError&) {
      ++not_identified;
    }
    consistent += sample_homoscedasticity_diagnostic(s, KernelConfig{}, w) ==
                  HeteroscedasticityVerdict::homoscedastic_consistent;
  }
  CHECK(not_identified >= 45);
  CHECK(consistent >= 45);
}

TEST_CASE("affine relabelling leaves lambda-hat unchanged", "[estimator]")
{
  const auto m1 = registered_model("M1");
  const auto relabelled = affine_equivalent(m1, 2.0, 0.3);
  const auto a = simulate(m1, 3000, 17, unit_box);
  const auto b = simulate(relabelled, 3000, 17, unit_box);
  const auto w = unit_weight(1);
  const auto la = estimate_lambda(a, KernelConfig{}, w);
  const auto lb = estimate_lambda(b, KernelConfig{}, w);
  REQUIRE(la.values.size() == lb.values.size());
  for (std::size_t k = 0; k < la.values.size(); ++k) {
    CHECK_THAT(la.grid[k], WithinAbs(lb.grid[k], 1e-10));
    CHECK_THAT(la.values[k], WithinAbs(lb.values[k], 1e-10));
  }
}

TEST_CASE("estimate_lambda input checks", "[estimator]")
{
  const auto w = unit_weight(1);
  const auto small = simulate(registered_model("M1"), 49, 1, unit_box);
  CHECK_THROWS_AS(estimate_lambda(small, KernelConfig{}, w), ConfigError);
  const auto s = simulate(registered_model("M1"), 500, 1, unit_box);
  CHECK_THROWS_AS(estimate_lambda(s, KernelConfig{}, unit_weight(2)), ConfigError);
  KernelConfig narrow;
  narrow.bandwidth_x = { 1e-4 };
  try {
    (void)estimate_lambda(s, narrow, w);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("try a covariate bandwidth") != std::string::npos);
  }
}

TEST_CASE("plug-in pipeline with the oracle lambda is the pure reconstruction", "[estimator]")
{
  const auto m1 = registered_model("M1");
  const auto w = unit_weight(1);
  const auto field = oracle_lambda_field(m1, w);
  const auto ab = coefficients_AB(m1, w);
  const ConstraintSet cs = TwoPoint{ -1.0, 1.0, 0.0, 1.0 };
  const auto grid = uniform_grid(-1.5, 1.5, 121);
  PluginOptions opts;
  const auto plug = plugin_transform(field.lambda, field.y0, ab.B, cs, grid, opts);
  const auto pure =
    reconstruct_constrained(field.lambda, { field.y0, 0.0, ab.B }, cs, grid, opts.reconstruction);
  CHECK(plug.transform.values == pure.values);
  CHECK(plug.repair_rate == 0.0);
  CHECK(plug.warnings.empty());
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!pure.interpolated[k])
      CHECK_THAT(pure.values[k], WithinAbs(0.5 * (grid[k] + 1.0), 1e-8));
}

TEST_CASE("plug-in reconstruction from samples", "[estimator]")
{
  const auto s = simulate(registered_model("M1"), 4000, 23, unit_box);
  const auto w = unit_weight(1);
  const auto wide = uniform_grid(-10.0, 10.0, 50);
  CHECK_THROWS_AS(plugin_reconstruct(s, KernelConfig{}, w, TwoPoint{ -1.0, 1.0, 0.0, 1.0 }, wide),
                  DomainError);
  const auto grid = uniform_grid(-1.5, 1.5, 121);
  const auto fit = plugin_reconstruct(s, KernelConfig{}, w, TwoPoint{ -1.0, 1.0, 0.0, 1.0 }, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    err = std::max(err, std::abs(fit.transform.values[k] - 0.5 * (grid[k] + 1.0)));
  CHECK(err < 0.3);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    CHECK(fit.transform.values[k + 1] >= fit.transform.values[k]);
  CHECK(lambda_estimate_to_csv(fit.lambda).rfind("y,lambda\n", 0) == 0);
}
