#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace trafoid::numerics {

struct DerivativeEstimate
{
  double value = 0.0;
  double error = 0.0;
};

/*
 * Ridders' extrapolation of centered differences: a tableau of step
 * sizes h, h/c, h/c^2, ... extrapolated in h^2. Returns the entry with the
 * smallest error estimate.
 */
template <class F>
DerivativeEstimate richardson_derivative(F&& f, double x, double h, int levels = 10)
{
  constexpr double con = 1.4;
  constexpr double con2 = con * con;
  std::vector<std::vector<double>> a(levels, std::vector<double>(levels, 0.0));
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  DerivativeEstimate best{ a[0][0], std::numeric_limits<double>::infinity() };
  for (int i = 1; i < levels; ++i) {
    h /= con;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = con2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= con2;
      const double err = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (err <= best.error) {
        best.error = err;
        best.value = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * best.error)
      break;
  }
  return best;
}

//! Finite-difference weights for the m-th derivative at z from arbitrary
//! distinct nodes (Fornberg's recursion). Returns one weight per node.
inline std::vector<double> fornberg_weights(double z, std::span<const double> nodes, int m)
{
  const std::size_t n = nodes.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = c[i][static_cast<std::size_t>(m)];
  return w;
}

} // namespace trafoid::numerics
