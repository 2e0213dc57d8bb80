#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "trafoid/error.hpp"

namespace trafoid::numerics {

//! Cubic Hermite interpolation on [x0, x1] from values and slopes.
inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x)
{
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

inline double hermite_derivative(double x0, double x1, double y0, double y1, double d0, double d1,
                                 double x)
{
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (6 * t2 - 6 * t) * -y1) / h + (3 * t2 - 4 * t + 1) * d0 +
         (3 * t2 - 2 * t) * d1;
}

//! Fritsch-Carlson limiting of Hermite end slopes so the cubic on
//! [x0, x1] stays monotone whenever the data are.
inline void limit_monotone_slopes(double x0, double x1, double y0, double y1, double& d0,
                                  double& d1)
{
  const double secant = (y1 - y0) / (x1 - x0);
  if (secant == 0.0) {
    d0 = d1 = 0.0;
    return;
  }
  if (d0 * secant < 0.0)
    d0 = 0.0;
  if (d1 * secant < 0.0)
    d1 = 0.0;
  const double a = d0 / secant;
  const double b = d1 / secant;
  const double r = a * a + b * b;
  if (r > 9.0) {
    const double tau = 3.0 / std::sqrt(r);
    d0 = tau * a * secant;
    d1 = tau * b * secant;
  }
}

//! Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline
{
public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x))
    , y_(std::move(y))
  {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw DomainError("cubic spline needs at least two points with matching values");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i + 1] > x_[i]))
        throw DomainError("cubic spline abscissae must be strictly increasing");

    // tridiagonal system for the second derivatives (Thomas algorithm)
    m_.assign(n, 0.0);
    if (n == 2)
      return;
    std::vector<double> c(n, 0.0);
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
      const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
      c[i] = h1 / diag;
      d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i)
      m_[i] = d[i] - c[i] * m_[i + 1];
  }

  double operator()(double x) const
  {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  double derivative(double x) const
  {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           (-(3 * a * a - 1) * m_[i] + (3 * b * b - 1) * m_[i + 1]) * h / 6.0;
  }

  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }

private:
  std::size_t segment(double x) const
  {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

//! Piecewise-linear evaluation of tabulated (x, y), extending the end
//! segments linearly outside the table.
inline double linear_interpolate(std::span<const double> x, std::span<const double> y, double at)
{
  auto it = std::upper_bound(x.begin(), x.end(), at);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  i = std::min(i, x.size() - 2);
  const double t = (at - x[i]) / (x[i + 1] - x[i]);
  return y[i] + t * (y[i + 1] - y[i]);
}

} // namespace trafoid::numerics
