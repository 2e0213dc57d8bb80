#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "trafoid/distributions.hpp"
#include "trafoid/error.hpp"
#include "trafoid/model.hpp"
#include "trafoid/samples.hpp"

using namespace trafoid;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double phi(double z)
{
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

const std::vector<double> x0{ 0.0 };

} // namespace

TEST_CASE("supported error laws are standardized", "[distributions]")
{
  for (const char* name : { "normal", "logistic" }) {
    const auto e = ErrorDistribution::by_name(name);
    const auto m = e.moments();
    CHECK_THAT(m.mass, WithinAbs(1.0, 1e-10));
    CHECK_THAT(m.mean, WithinAbs(0.0, 1e-8));
    CHECK_THAT(m.variance, WithinAbs(1.0, 1e-8));
    CHECK_NOTHROW(e.validate());
    double last = 0.0;
    for (double z = -12.0; z <= 12.0; z += 0.25) {
      CHECK(e.pdf(z) > 0.0);
      CHECK(e.cdf(z) >= last);
      last = e.cdf(z);
      // the round trip loses digits where the CDF approaches 1
      if (std::abs(z) <= 4.0)
        CHECK_THAT(e.quantile(e.cdf(z)), WithinAbs(z, 1e-9));
    }
    CHECK(e.cdf(-40.0) < 1e-12);
    CHECK(e.cdf(40.0) == 1.0);
  }
  CHECK_THROWS_AS(ErrorDistribution::by_name("cauchy"), DomainError);
  CHECK_THROWS_AS(ErrorDistribution::standard_normal().quantile(1.0), DomainError);
}

TEST_CASE("non-standardized error laws are rejected", "[distributions]")
{
  const auto base = ErrorDistribution::standard_normal();
  const ErrorDistribution wide(
    "normal(0,4)", [](double z) { return 0.5 * phi(0.5 * z); },
    [base](double z) { return base.cdf(0.5 * z); },
    [base](double p) { return 2.0 * base.quantile(p); });
  CHECK_THROWS_AS(wide.validate(), DomainError);
  // the homoscedastic model with this law fails the same check on construction
  CHECK_THROWS_AS(TransformationModel("M2wide", 1, identity_transform(), linear_map(0.0, { 1.0 }),
                                      constant_map(1.0, 1), wide),
                  DomainError);
}

TEST_CASE("conditional CDF of M1", "[model]")
{
  const auto m1 = registered_model("M1");
  CHECK(cond_cdf(m1, 0.0, x0) == 0.5);
  CHECK_THAT(cond_cdf(m1, 1.0, x0), WithinAbs(0.8413447460685429, 1e-12));
  CHECK_THAT(cond_cdf(m1, 60.0, x0), WithinAbs(1.0, 1e-15));

  CHECK_THAT(cond_cdf_dy(m1, 0.0, x0), WithinAbs(0.3989422804014327, 1e-12));
  const std::vector<double> xl{ std::log(2.0) };
  CHECK_THAT(cond_cdf_dy(m1, 0.0, xl), WithinAbs(phi(-std::log(2.0) / 2.0) / 2.0, 1e-12));

  CHECK_THAT(cond_cdf_dxi(m1, 0.0, x0, 0), WithinAbs(-0.3989422804014327, 1e-12));
}

TEST_CASE("analytic partials match finite differences", "[model]")
{
  const double step = 1e-5;
  for (const char* name : { "M1", "M2", "M3", "M1neg", "M1L" }) {
    const auto m = registered_model(name);
    for (double y : { -1.3, -0.2, 0.4, 1.1 })
      for (double x : { 0.1, 0.5, 0.9 }) {
        std::vector<double> xp{ x + step };
        std::vector<double> xm{ x - step };
        const std::vector<double> xs{ x };
        const double fd_y = (cond_cdf(m, y + step, xs) - cond_cdf(m, y - step, xs)) / (2 * step);
        const double fd_x = (cond_cdf(m, y, xp) - cond_cdf(m, y, xm)) / (2 * step);
        CHECK_THAT(cond_cdf_dy(m, y, xs), WithinAbs(fd_y, 1e-6));
        CHECK_THAT(cond_cdf_dxi(m, y, xs, 0), WithinAbs(fd_x, 1e-6));
      }
  }
}

TEST_CASE("homoscedastic x-partial reduces to -f(h - g) dg", "[model]")
{
  const auto m2 = registered_model("M2");
  for (double y : { -0.7, 0.0, 0.8 }) {
    const std::vector<double> x{ 0.3 };
    CHECK_THAT(cond_cdf_dxi(m2, y, x, 0), WithinAbs(-phi(y - 0.3) * 1.0, 1e-14));
  }
}

TEST_CASE("model components", "[model]")
{
  const auto m3 = registered_model("M3");
  for (double y = -3.0; y <= 3.0; y += 0.1) {
    CHECK(m3.dh(y) > 0.0);
    CHECK_THAT(m3.h_inverse(m3.h(y)), WithinAbs(y, 1e-10));
  }
  const std::vector<double> half{ 0.5 };
  CHECK(m3.g(half) == 0.5);
  CHECK_THAT(m3.sigma(half), WithinRel(1.6487212707001282, 1e-15));

  const Transformation cubic = cubic_transform(0.5);
  for (double y = -2.0; y <= 2.0; y += 0.25)
    CHECK(cubic.derivative(y) > 0.0);
  CHECK_THROWS_AS(cubic_transform(-1.0), DomainError);

  CHECK_THROWS_AS(registered_model("M9"), DomainError);
  const auto names = registered_model_names();
  CHECK(std::find(names.begin(), names.end(), "M3") != names.end());
}

TEST_CASE("numeric inverse of a transformation without a closed form", "[model]")
{
  ModelSpec spec;
  spec.h = "cubic";
  spec.h_param = 0.3;
  const auto m = build_model(spec);
  for (double y : { -2.0, -0.5, 0.0, 0.7, 1.9 })
    CHECK_THAT(m.h_inverse(m.h(y)), WithinAbs(y, 1e-10));
}

TEST_CASE("custom model components", "[model]")
{
  ModelSpec spec;
  spec.h = "sinh";
  spec.g_intercept = 0.25;
  spec.g_coef = { 2.0 };
  spec.sigma_coef = { -0.5 };
  const auto m = build_model(spec);
  const std::vector<double> x{ 0.4 };
  CHECK_THAT(m.g(x), WithinAbs(1.05, 1e-15));
  CHECK_THAT(m.sigma(x), WithinRel(std::exp(-0.2), 1e-15));
  CHECK_THAT(m.h(1.0), WithinRel(std::sinh(1.0), 1e-15));

  spec.sigma_coef = { 1.0, 2.0 };
  CHECK_THROWS_AS(build_model(spec), DomainError);
  spec = {};
  spec.h = "box-cox";
  CHECK_THROWS_AS(build_model(spec), DomainError);
}

TEST_CASE("affine relabelling leaves the conditional CDF unchanged", "[model]")
{
  const auto m1 = registered_model("M1");
  const auto m = affine_equivalent(m1, 2.5, -0.7);
  for (double y : { -1.0, 0.3, 1.2 })
    for (double x : { 0.2, 0.8 }) {
      const std::vector<double> xs{ x };
      CHECK_THAT(cond_cdf(m, y, xs), WithinAbs(cond_cdf(m1, y, xs), 1e-14));
    }
  CHECK_THROWS_AS(affine_equivalent(m1, -1.0, 0.0), DomainError);
}

TEST_CASE("weight functions", "[model]")
{
  const auto w = unit_weight(2, 1);
  const std::vector<double> inside{ 0.5, 0.5 };
  const std::vector<double> outside{ 0.5, 1.5 };
  CHECK(w(inside) == 1.0);
  CHECK(w(outside) == 0.0);
  CHECK(w.support().volume() == 1.0);
  CHECK(w.index() == 1);
  CHECK_THROWS_AS(WeightFunction(Box{ { 0.0 }, { 0.0 } }), DomainError);
  CHECK_THROWS_AS(WeightFunction(Box{ { 0.0 }, { 1.0 } }, 3), DomainError);
}

TEST_CASE("simulation is reproducible and centred", "[samples]")
{
  const auto m1 = registered_model("M1");
  const Box box{ { 0.0 }, { 1.0 } };
  const auto a = simulate(m1, 3, 7, box);
  const auto b = simulate(m1, 3, 7, box);
  REQUIRE(a.size() == 3);
  CHECK(samples_to_csv(a) == samples_to_csv(b));
  CHECK(samples_to_csv(a) != samples_to_csv(simulate(m1, 3, 8, box)));

  const std::size_t n = 100000;
  const auto big = simulate(m1, n, 11, box);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    mean += (m1.h(big.y(i)) - m1.g(big.x(i))) / m1.sigma(big.x(i));
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i)
    REQUIRE(box.contains(big.x(i)));
}

TEST_CASE("sample CSV round trip is bit exact", "[samples]")
{
  const auto m4 = registered_model("M4");
  const Box box{ { 0.0, -1.0 }, { 1.0, 1.0 } };
  const auto s = simulate(m4, 50, 3, box);
  const std::string csv = samples_to_csv(s);
  CHECK(csv.rfind("y,x1,x2\n", 0) == 0);
  const auto back = samples_from_csv(csv);
  REQUIRE(back.size() == s.size());
  REQUIRE(back.dim() == 2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.y(i) == s.y(i));
    CHECK(back.x(i)[1] == s.x(i)[1]);
  }
  CHECK(samples_to_csv(back) == csv);
}

TEST_CASE("malformed sample CSV", "[samples]")
{
  CHECK_THROWS_AS(samples_from_csv(""), IoError);
  CHECK_THROWS_AS(samples_from_csv("y,z1\n1,2\n"), IoError);
  CHECK_THROWS_AS(samples_from_csv("y,x1\n1,abc\n"), IoError);
  CHECK_THROWS_AS(samples_from_csv("y,x1\n1\n"), IoError);
  CHECK_THROWS_AS(read_samples_csv("/nonexistent/samples.csv"), IoError);
}

TEST_CASE("seed mixing", "[samples]")
{
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  const double u = to_open_unit(0);
  CHECK(u > 0.0);
  CHECK(to_open_unit(~0ULL) == 1.0 - 0x1.0p-53);
}
