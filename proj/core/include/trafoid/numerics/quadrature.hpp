#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <span>
#include <vector>

namespace trafoid::numerics {

struct QuadratureOptions
{
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
};

struct QuadratureResult
{
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;

  QuadratureResult& operator+=(const QuadratureResult& other)
  {
    value += other.value;
    error += other.error;
    evaluations += other.evaluations;
    converged = converged && other.converged;
    return *this;
  }
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
  0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
  0.207784955007898467600689403773245, 0.000000000000000000000000000000000
};
inline constexpr std::array<double, 8> kKronrodWeights = {
  0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
  0.204432940075298892414161999234649, 0.209482141084727828012999174891714
};
inline constexpr std::array<double, 4> kGaussWeights = {
  0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
  0.381830050505118944950369775488975, 0.417959183673469387755102040816327
};

struct Panel
{
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b)
{
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    abs_sum += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1)
      gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  abs_sum *= std::abs(half);
  // |K - G| over-estimates the Kronrod error for smooth integrands; the
  // roundoff floor keeps tight tolerances from subdividing forever.
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum;
  const double error = std::max(std::abs(kronrod - gauss), roundoff);
  return { a, b, kronrod, error };
}

} // namespace detail

//! Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
//! Reversed limits flip the sign. Non-finite panel values stop the
//! refinement and are reported through `converged = false`.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {})
{
  QuadratureResult result;
  if (a == b)
    return result;
  const double sign = a < b ? 1.0 : -1.0;
  if (a > b)
    std::swap(a, b);

  std::priority_queue<detail::Panel> panels;
  panels.push(detail::gauss_kronrod_15(f, a, b));
  result.evaluations = 15;
  double total = panels.top().value;
  double total_error = panels.top().error;
  int subdivisions = 0;

  while (true) {
    if (!std::isfinite(total) || !std::isfinite(total_error)) {
      result.converged = false;
      break;
    }
    if (total_error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total)))
      break;
    if (subdivisions >= opts.max_subdivisions) {
      result.converged = false;
      break;
    }
    const detail::Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // panel cannot be split further in double precision
      result.converged = total_error <= 10.0 * std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
      break;
    }
    panels.pop();
    const detail::Panel left = detail::gauss_kronrod_15(f, worst.a, mid);
    const detail::Panel right = detail::gauss_kronrod_15(f, mid, worst.b);
    result.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }

  // re-sum to shed the drift of the running update
  double sum = 0.0;
  double err = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    err += panels.top().error;
    panels.pop();
  }
  result.value = sign * sum;
  result.error = err;
  if (!std::isfinite(sum) || !std::isfinite(err))
    result.converged = false;
  return result;
}

//! Integrates f over [a, b] when f has a singularity at `pole` just outside
//! the interval. The interval is cut into panels whose widths grow
//! geometrically with the distance to the pole, so each panel sees a
//! bounded relative variation of 1/(u - pole)-type behaviour.
template <class F>
QuadratureResult integrate_near_pole(F&& f, double a, double b, double pole,
                                     const QuadratureOptions& opts = {})
{
  if (a == b)
    return {};
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (pole >= lo && pole <= hi) {
    QuadratureResult bad;
    bad.value = std::numeric_limits<double>::quiet_NaN();
    bad.converged = false;
    return bad;
  }

  // breakpoints at distances d, 2d, 4d, ... from the pole
  const bool pole_below = pole < lo;
  const double d_near = pole_below ? lo - pole : pole - hi;
  const double d_far = pole_below ? hi - pole : pole - lo;
  std::vector<double> cuts{ pole_below ? lo : hi };
  for (double d = 2.0 * d_near; d < d_far; d *= 2.0)
    cuts.push_back(pole_below ? pole + d : pole - d);
  cuts.push_back(pole_below ? hi : lo);
  std::sort(cuts.begin(), cuts.end());

  QuadratureOptions panel_opts = opts;
  panel_opts.abs_tol = opts.abs_tol / static_cast<double>(cuts.size() - 1);

  QuadratureResult total;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += integrate(f, cuts[k], cuts[k + 1], panel_opts);
  total.value *= sign;
  return total;
}

//! Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(std::size_t n)
{
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const double jj = static_cast<double>(j);
        p0 = ((2.0 * jj + 1.0) * z * p1 - jj * p2) / (jj + 1.0);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

//! Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
inline GaussLegendreRule composite_gauss_legendre(double a, double b, std::size_t panels,
                                                  std::size_t order)
{
  const GaussLegendreRule base = gauss_legendre(order);
  GaussLegendreRule rule;
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    for (std::size_t j = 0; j < order; ++j) {
      rule.nodes.push_back(lo + 0.5 * width * (base.nodes[j] + 1.0));
      rule.weights.push_back(0.5 * width * base.weights[j]);
    }
  }
  return rule;
}

//! Integral of f(x) over an axis-aligned box. Nested adaptive quadrature
//! for up to three dimensions; plain Monte Carlo (deterministic seed) with
//! its standard error beyond that.
template <class F>
QuadratureResult integrate_box(F&& f, std::span<const double> lower, std::span<const double> upper,
                               const QuadratureOptions& opts = {},
                               std::size_t mc_samples = 200000, std::uint64_t mc_seed = 0x5eed)
{
  const std::size_t dim = lower.size();
  std::vector<double> x(dim, 0.0);

  if (dim > 3) {
    std::mt19937_64 gen(mc_seed);
    double volume = 1.0;
    for (std::size_t k = 0; k < dim; ++k)
      volume *= upper[k] - lower[k];
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
        x[k] = lower[k] + u * (upper[k] - lower[k]);
      }
      const double v = f(std::span<const double>(x));
      const double delta = v - mean;
      mean += delta / static_cast<double>(s + 1);
      m2 += delta * (v - mean);
    }
    QuadratureResult r;
    const auto ns = static_cast<double>(mc_samples);
    r.value = volume * mean;
    r.error = volume * std::sqrt(m2 / (ns - 1.0) / ns);
    r.evaluations = static_cast<long>(mc_samples);
    r.converged = std::isfinite(r.value);
    return r;
  }

  QuadratureResult total;
  total.evaluations = 0;
  // Recursion over coordinates; inner integrals get a tighter absolute
  // tolerance so their errors do not dominate the outer estimate.
  auto nested = [&](auto&& self, std::size_t axis, double tol) -> double {
    QuadratureOptions axis_opts = opts;
    axis_opts.abs_tol = tol;
    double width = upper[axis] - lower[axis];
    auto slice = [&](double t) {
      x[axis] = t;
      if (axis + 1 == dim)
        return static_cast<double>(f(std::span<const double>(x)));
      return self(self, axis + 1, tol / (10.0 * std::max(width, 1.0)));
    };
    QuadratureResult r = integrate(slice, lower[axis], upper[axis], axis_opts);
    total.evaluations += r.evaluations;
    if (axis == 0)
      total.error = r.error;
    total.converged = total.converged && r.converged;
    return r.value;
  };
  total.value = nested(nested, 0, opts.abs_tol);
  return total;
}

} // namespace trafoid::numerics
