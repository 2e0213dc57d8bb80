#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "trafoid/error.hpp"
#include "trafoid/lambda.hpp"
#include "trafoid/model.hpp"
#include "trafoid/ode_verify.hpp"
#include "trafoid/reconstruction.hpp"

using namespace trafoid;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double m1_lambda(double y)
{
  return -(0.5 + y);
}

double m3_lambda(double y)
{
  return -(0.5 + std::sinh(y)) / std::cosh(y);
}

} // namespace

TEST_CASE("RK4 on reference fields", "[ivp]")
{
  const auto zero = integrate_ivp({ [](double, double) { return 0.0; }, 0.0, 1.0, 1.0 }, 64);
  for (double v : zero.values)
    CHECK(v == 1.0);

  const auto growth = integrate_ivp({ [](double, double h) { return h; }, 0.0, 1.0, 1.0 }, 256);
  REQUIRE(growth.grid.size() == 257);
  CHECK(growth.grid.back() == 1.0);
  CHECK_THAT(growth.values.back(), WithinAbs(std::exp(1.0), 1e-8));
}

TEST_CASE("RK4 is fourth order", "[ivp]")
{
  // errors at N = 16 ... 256 for h' = h on [0, 1]
  const double frozen[] = { 3.28e-7, 2.10e-8, 1.33e-9, 8.38e-11, 5.26e-12 };
  std::size_t n = 16;
  double last = 0.0;
  for (double expected : frozen) {
    const auto s = integrate_ivp({ [](double, double h) { return h; }, 0.0, 1.0, 1.0 }, n);
    const double err = std::abs(s.values.back() - std::exp(1.0));
    CHECK_THAT(err, WithinRel(expected, 0.02));
    if (last > 0.0)
      CHECK_THAT(std::log2(last / err), WithinAbs(4.0, 0.05));
    last = err;
    n *= 2;
  }
}

TEST_CASE("IVP input checks", "[ivp]")
{
  CHECK_THROWS_AS(validate(IvpSpec{ [](double, double) { return 0.0; }, 1.0, 0.0, 1.0 }), DomainError);
  CHECK_THROWS_AS(validate(IvpSpec{ [](double, double) { return 0.0; }, 0.0, 1.0, -1.0 }), DomainError);
  CHECK_THROWS_AS(validate(IvpSpec{ {}, 0.0, 1.0, 1.0 }), DomainError);
  CHECK_THROWS_AS(integrate_ivp({ [](double, double) { return 0.0; }, 0.0, 1.0, 1.0 }, 8), DomainError);
  CHECK_THROWS_AS(integrate_ivp({ [](double, double h) { return h * h; }, 0.0, 2.0, 1.0 }, 64),
                  NumericalError);
}

TEST_CASE("closed form and IVP agree for M1", "[ivp]")
{
  // with A = 0 the solution through theta(0) = 1/2 is theta = 1/2 + y
  const Identification id{ -0.5, 0.0, 1.0 };
  const auto spec = reconstruction_ivp(m1_lambda, id, 0.0, 1.5, 0.5);
  const auto sol = integrate_ivp(spec, 1000);
  const auto closed = reconstruct_upper(m1_lambda, id, 0.0, 0.5, sol.grid, 1e-3);
  for (std::size_t k = 0; k < sol.grid.size(); ++k)
    CHECK_THAT(sol.values[k], WithinAbs(closed[k], 1e-7));
  CHECK_THROWS_AS(reconstruction_ivp(m1_lambda, id, -1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("uniqueness probe", "[ivp]")
{
  const auto smooth = uniqueness_probe({ [](double, double h) { return h; }, 0.0, 1.0, 1.0 });
  CHECK(smooth.consistent);
  CHECK(smooth.max_deviation <= 1e-9);

  const double y0 = std::asinh(-0.5);
  const auto spec = reconstruction_ivp(m3_lambda, { y0, 0.0, 1.0 }, y0 + 0.05, y0 + 2.0, 1.0);
  const auto m3 = uniqueness_probe(spec, 2000);
  CHECK(m3.consistent);
  CHECK(m3.max_deviation <= 1e-6);
  CHECK_THROWS_AS(uniqueness_probe(spec, 1001), DomainError);
}

TEST_CASE("closed-form cross-check on oracle fields", "[ivp]")
{
  const auto w = unit_weight(1);
  for (const char* name : { "M1", "M3", "M1neg" }) {
    const auto m = registered_model(name);
    const auto f = oracle_lambda_field(m, w);
    const auto ab = coefficients_AB(m, w);
    const auto r = closed_form_crosscheck(f.lambda, f.y0, ab.B, f.y0 + 0.075, f.y0 + 1.5);
    CHECK(r.sup_deviation <= 1e-6);
    CHECK(r.uniqueness.max_deviation <= 1e-6);
  }
}

TEST_CASE("Gronwall checks on hand-built instances", "[gronwall]")
{
  SECTION("zero kernel")
  {
    GronwallInstance inst{ 0.0, 1.0, [](double y) { return y - 1.0; }, [](double y) { return y; },
                           [](double) { return 0.0; } };
    CHECK(gronwall_check(inst).verdict == GronwallVerdict::holds);
  }
  SECTION("v = 0 forces u <= 0")
  {
    GronwallInstance zero{ 0.0, 1.0, [](double) { return 0.0; }, [](double) { return 0.0; },
                           [](double) { return 1.0; } };
    CHECK(gronwall_check(zero).verdict == GronwallVerdict::holds);
  }
  SECTION("equality case v = 1, q = 1: u = e^y is the extremal solution")
  {
    GronwallInstance eq{ 0.0, 1.0, [](double y) { return std::exp(y) - 1e-6; },
                         [](double) { return 1.0; }, [](double) { return 1.0; } };
    const auto r = gronwall_check(eq, 512);
    CHECK(r.verdict == GronwallVerdict::holds);
    CHECK(r.conclusion_excess <= 0.0);
  }
  SECTION("hypothesis violated")
  {
    GronwallInstance bad{ 0.0, 1.0, [](double) { return 5.0; }, [](double) { return 1.0; },
                          [](double) { return 1.0; } };
    const auto r = gronwall_check(bad);
    CHECK(r.verdict == GronwallVerdict::hypothesis_fails);
    CHECK(r.hypothesis_excess > 0.0);
  }
  SECTION("negative kernel is rejected")
  {
    GronwallInstance neg{ 0.0, 1.0, [](double) { return 0.0; }, [](double) { return 0.0; },
                          [](double) { return -1.0; } };
    CHECK_THROWS_AS(gronwall_check(neg), DomainError);
  }
  CHECK(to_string(GronwallVerdict::conclusion_violated) == "conclusion_violated");
}

TEST_CASE("randomised Gronwall suite", "[gronwall]")
{
  const auto suite = run_gronwall_suite(1000, 256, 20240601);
  CHECK(suite.instances == 1000);
  CHECK(suite.holds == 1000);
  CHECK(suite.conclusion_violated == 0);
  CHECK(suite.failing_seeds.empty());
  CHECK(suite.max_conclusion_excess < 0.0);

  const auto a = random_gronwall_instance(5, 256);
  const auto b = random_gronwall_instance(5, 256);
  CHECK(a.b == b.b);
  CHECK(a.u(0.3 * a.b) == b.u(0.3 * b.b));
}

TEST_CASE("verification report", "[gronwall]")
{
  const auto w = unit_weight(1);
  const auto m = registered_model("M1");
  const auto f = oracle_lambda_field(m, w);
  VerificationReport rep;
  rep.model = "M1";
  rep.gronwall = run_gronwall_suite(50, 128, 1);
  rep.crosscheck = closed_form_crosscheck(f.lambda, f.y0, 1.0, f.y0 + 0.075, f.y0 + 1.5);
  CHECK(rep.passed());
  const std::string text = rep.to_text();
  CHECK(text.find("model = M1\n") != std::string::npos);
  CHECK(text.find("status = pass\n") != std::string::npos);

  rep.crosscheck_tol = 0.0;
  CHECK_FALSE(rep.passed());
  CHECK(rep.to_text().find("status = fail\n") != std::string::npos);
}
