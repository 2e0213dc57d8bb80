#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "trafoid/error.hpp"

namespace trafoid::numerics {

struct RootOptions
{
  double x_tol = 1e-13;
  int max_iterations = 400;
};

struct RootResult
{
  double root = 0.0;
  double f_root = 0.0;
  int iterations = 0;
};

/*
 * Bracketed root finding: bisection safeguarding an Illinois-modified
 * secant step. The bracket shrinks at least geometrically every two
 * iterations, so the method cannot diverge for a continuous f.
 */
template <class F>
RootResult find_root(F&& f, double lo, double hi, const RootOptions& opts = {})
{
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0)
    return { lo, 0.0, 0 };
  if (fhi == 0.0)
    return { hi, 0.0, 0 };
  if (!(std::isfinite(flo) && std::isfinite(fhi)) || (flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream msg;
    msg << "no sign change in bracket [" << lo << ", " << hi << "]: f = " << flo << ", " << fhi;
    throw NumericalError(msg.str());
  }

  int side = 0;
  bool bisect = false;
  double previous_width = hi - lo;
  RootResult r;
  for (r.iterations = 1; r.iterations <= opts.max_iterations; ++r.iterations) {
    double x = bisect ? 0.5 * (lo + hi) : (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi))
      x = 0.5 * (lo + hi);
    if (!(x > lo && x < hi)) {
      r.root = std::abs(flo) < std::abs(fhi) ? lo : hi;
      r.f_root = std::abs(flo) < std::abs(fhi) ? flo : fhi;
      return r;
    }
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg << "non-finite function value at x = " << x << " during root search";
      throw NumericalError(msg.str());
    }
    if (fx == 0.0)
      return { x, 0.0, r.iterations };
    if ((fx > 0.0) == (fhi > 0.0)) {
      hi = x;
      fhi = fx;
      if (side == -1)
        flo *= 0.5;
      side = -1;
    } else {
      lo = x;
      flo = fx;
      if (side == 1)
        fhi *= 0.5;
      side = 1;
    }
    // a secant step that failed to halve the bracket forces a bisection
    bisect = (hi - lo) > 0.5 * previous_width;
    previous_width = hi - lo;
    if (hi - lo <= opts.x_tol) {
      r.root = 0.5 * (lo + hi);
      r.f_root = f(r.root);
      return r;
    }
  }
  std::ostringstream msg;
  msg << "root search did not converge in " << opts.max_iterations << " iterations";
  throw NumericalError(msg.str());
}

//! Indices i with a strict sign change between values[i] and values[i + 1].
//! Exact zeros are attributed to the interval on their left.
inline std::vector<std::size_t> sign_changes(std::span<const double> values)
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double a = values[i];
    const double b = values[i + 1];
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0))
      out.push_back(i);
  }
  return out;
}

} // namespace trafoid::numerics
