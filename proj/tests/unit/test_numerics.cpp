#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "trafoid/error.hpp"
#include "trafoid/numerics/differences.hpp"
#include "trafoid/numerics/interpolation.hpp"
#include "trafoid/numerics/isotonic.hpp"
#include "trafoid/numerics/quadrature.hpp"
#include "trafoid/numerics/roots.hpp"

using namespace trafoid;
using namespace trafoid::numerics;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("adaptive quadrature on smooth integrands", "[quadrature]")
{
  const auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.converged);
  CHECK_THAT(r.value, WithinAbs(2.0, 1e-12));

  const auto gauss = integrate([](double x) { return std::exp(-0.5 * x * x); }, -40.0, 40.0);
  CHECK_THAT(gauss.value, WithinRel(std::sqrt(2.0 * std::numbers::pi), 1e-12));

  SECTION("reversed limits flip the sign")
  {
    const auto back = integrate([](double x) { return x * x; }, 1.0, 0.0);
    CHECK_THAT(back.value, WithinAbs(-1.0 / 3.0, 1e-14));
  }
  SECTION("empty interval")
  {
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
  }
}

TEST_CASE("pole-graded quadrature of 1/x", "[quadrature]")
{
  const auto r = integrate_near_pole([](double x) { return 1.0 / x; }, 1e-4, 1.0, 0.0,
                                     { 1e-13, 1e-13, 4000 });
  CHECK(r.converged);
  CHECK_THAT(r.value, WithinRel(std::log(1e4), 1e-12));

  const auto left = integrate_near_pole([](double x) { return 1.0 / x; }, -1.0, -1e-3, 0.0);
  CHECK_THAT(left.value, WithinRel(-std::log(1e3), 1e-11));

  const auto across = integrate_near_pole([](double x) { return 1.0 / x; }, -1.0, 1.0, 0.0);
  CHECK_FALSE(across.converged);
  CHECK(std::isnan(across.value));
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1", "[quadrature]")
{
  for (std::size_t n : { 2u, 3u, 5u, 8u }) {
    const auto rule = gauss_legendre(n);
    for (std::size_t deg = 0; deg <= 2 * n - 1; ++deg) {
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        sum += rule.weights[k] * std::pow(rule.nodes[k], static_cast<double>(deg));
      const double exact = deg % 2 ? 0.0 : 2.0 / static_cast<double>(deg + 1);
      CHECK_THAT(sum, WithinAbs(exact, 1e-14));
    }
  }
  const auto comp = composite_gauss_legendre(0.0, 2.0, 7, 3);
  double sum = 0.0;
  for (std::size_t k = 0; k < comp.nodes.size(); ++k)
    sum += comp.weights[k] * std::exp(comp.nodes[k]);
  CHECK_THAT(sum, WithinRel(std::exp(2.0) - 1.0, 1e-8));
}

TEST_CASE("box quadrature in two dimensions", "[quadrature]")
{
  const std::vector<double> lo{ 0.0, 0.0 };
  const std::vector<double> hi{ 1.0, 2.0 };
  const auto r = integrate_box([](std::span<const double> x) { return x[0] * x[1]; }, lo, hi);
  CHECK_THAT(r.value, WithinAbs(1.0, 1e-12));
}

TEST_CASE("bracketed root finding", "[roots]")
{
  const auto r = find_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0);
  CHECK_THAT(r.root, WithinAbs(0.7390851332151607, 1e-13));
  CHECK(find_root([](double x) { return -x; }, -1.0, 1.0).root == 0.0);
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), NumericalError);
}

TEST_CASE("sign changes are reported between neighbours", "[roots]")
{
  const std::vector<double> v{ 1.0, 0.5, -0.2, -0.1, 0.3 };
  const auto idx = sign_changes(v);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 3);
}

TEST_CASE("Fornberg stencils differentiate quartics exactly", "[differences]")
{
  const std::vector<double> nodes{ -0.3, -0.1, 0.0, 0.2, 0.35 };
  const auto w = fornberg_weights(0.05, nodes, 1);
  double d = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    d += w[k] * std::pow(nodes[k], 4);
  CHECK_THAT(d, WithinAbs(4.0 * std::pow(0.05, 3), 1e-13));
}

TEST_CASE("Richardson derivative", "[differences]")
{
  const auto d = richardson_derivative([](double x) { return std::exp(x); }, 0.3, 0.1);
  CHECK_THAT(d.value, WithinRel(std::exp(0.3), 1e-12));
  CHECK(d.error < 1e-10);
}

TEST_CASE("natural cubic spline", "[interpolation]")
{
  std::vector<double> x;
  std::vector<double> y;
  for (int k = 0; k <= 10; ++k) {
    x.push_back(0.1 * k);
    y.push_back(2.0 - 3.0 * x.back());
  }
  const CubicSpline lin(x, y);
  CHECK_THAT(lin(0.537), WithinAbs(2.0 - 3.0 * 0.537, 1e-14));
  CHECK_THAT(lin.derivative(0.91), WithinAbs(-3.0, 1e-13));

  std::vector<double> ys;
  for (double t : x)
    ys.push_back(std::sin(t));
  const CubicSpline s(x, ys);
  CHECK_THAT(s(0.45), WithinAbs(std::sin(0.45), 1e-4));
  CHECK_THROWS_AS(CubicSpline({ 0.0, 0.0 }, { 1.0, 2.0 }), DomainError);
}

TEST_CASE("cubic Hermite pieces", "[interpolation]")
{
  CHECK(hermite(0.0, 1.0, 2.0, 5.0, 1.0, 1.0, 0.0) == 2.0);
  CHECK(hermite(0.0, 1.0, 2.0, 5.0, 1.0, 1.0, 1.0) == 5.0);
  // x^3 on [1, 2] is reproduced exactly
  CHECK_THAT(hermite(1.0, 2.0, 1.0, 8.0, 3.0, 12.0, 1.5), WithinAbs(3.375, 1e-14));
  CHECK_THAT(hermite_derivative(1.0, 2.0, 1.0, 8.0, 3.0, 12.0, 1.5), WithinAbs(6.75, 1e-13));

  double d0 = 30.0;
  double d1 = -1.0;
  limit_monotone_slopes(0.0, 1.0, 0.0, 1.0, d0, d1);
  CHECK(d1 == 0.0);
  CHECK(d0 <= 3.0 + 1e-15);
}

TEST_CASE("pool-adjacent-violators", "[isotonic]")
{
  const std::vector<double> v{ 1.0, 3.0, 2.0, 4.0, 3.5, 3.5, 5.0 };
  const auto out = isotonic_increasing(v);
  const std::vector<double> expected{ 1.0, 2.5, 2.5, 11.0 / 3.0, 11.0 / 3.0, 11.0 / 3.0, 5.0 };
  REQUIRE(out.size() == expected.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    CHECK_THAT(out[k], WithinAbs(expected[k], 1e-15));

  const std::vector<double> sorted{ -1.0, 0.0, 2.0 };
  CHECK(isotonic_increasing(sorted) == sorted);
}
