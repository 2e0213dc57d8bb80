#include "trafoid/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trafoid/error.hpp"
#include "trafoid/numerics/differences.hpp"
#include "trafoid/numerics/interpolation.hpp"
#include "trafoid/numerics/isotonic.hpp"

namespace trafoid {

namespace {

int sign_of(double v)
{
  return (v > 0.0) - (v < 0.0);
}

numerics::QuadratureResult inverse_lambda_integral(const LambdaFn& lambda, double from, double to,
                                                   double pole,
                                                   const numerics::QuadratureOptions& opts)
{
  auto inv = [&](double u) { return 1.0 / lambda(u); };
  numerics::QuadratureResult r = numerics::integrate_near_pole(inv, from, to, pole, opts);
  if (!r.converged || !std::isfinite(r.value)) {
    std::ostringstream msg;
    msg << "quadrature of 1/lambda over [" << std::min(from, to) << ", " << std::max(from, to)
        << "] failed near the pole y0 = " << pole << " (estimate " << r.value << ", error "
        << r.error << ")";
    throw NumericalError(msg.str());
  }
  return r;
}

// sign(lambda) is -sign(B) above y0 and sign(B) below, since A + B h(y)
// changes sign at y0 and h' > 0.
void check_lambda_sign(const LambdaFn& lambda, const Identification& id, double y)
{
  const double l = lambda(y);
  const int expected = y > id.y0 ? -sign_of(id.B) : sign_of(id.B);
  if (sign_of(l) != expected) {
    std::ostringstream msg;
    msg << "lambda(" << y << ") = " << l << " has the wrong sign for B = " << id.B
        << " and y0 = " << id.y0 << " (additional root of lambda?)";
    throw IdentificationError(msg.str());
  }
}

double branch_value(const Identification& id, double anchor_value, double integral)
{
  return ((id.A + id.B * anchor_value) * std::exp(-id.B * integral) - id.A) / id.B;
}

template <class... Ts>
struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

void validate(const ConstraintSet& constraints)
{
  std::visit(Overloaded{
               [](const Canonical& c) {
                 if (!std::isfinite(c.y1) || !std::isfinite(c.alpha))
                   throw DomainError("canonical constraint values must be finite");
               },
               [](const TwoPoint& c) {
                 if (!(c.ya < c.yb))
                   throw DomainError("two-point constraints need ya < yb");
                 if (!(c.alpha_a < c.alpha_b))
                   throw DomainError("two-point constraints need alpha_a < alpha_b (h is increasing)");
               },
               [](const PointSlope& c) {
                 if (!(c.slope > 0.0))
                   throw DomainError("point-plus-slope constraints need a positive slope");
               } },
             constraints);
}

std::string describe(const ConstraintSet& constraints)
{
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{ [&](const Canonical& c) { out << "canonical(y1=" << c.y1 << ", alpha=" << c.alpha << ")"; },
                         [&](const TwoPoint& c) {
                           out << "two_point(ya=" << c.ya << ", yb=" << c.yb << ", alpha_a=" << c.alpha_a
                               << ", alpha_b=" << c.alpha_b << ")";
                         },
                         [&](const PointSlope& c) {
                           out << "point_slope(ya=" << c.ya << ", alpha_a=" << c.alpha_a
                               << ", slope=" << c.slope << ")";
                         } },
             constraints);
  return out.str();
}

std::vector<double> reconstruct_branch(const LambdaFn& lambda, const Identification& id,
                                       double anchor, double anchor_value,
                                       std::span<const double> points, double excision,
                                       const numerics::QuadratureOptions& opts)
{
  const bool upper = anchor > id.y0;
  if (anchor == id.y0)
    throw DomainError("branch anchor must differ from y0");
  for (double p : points) {
    const bool ok = upper ? p > id.y0 + excision : p < id.y0 - excision;
    if (!ok) {
      std::ostringstream msg;
      msg << "grid point " << p << " is not on the " << (upper ? "upper" : "lower")
          << " branch outside the excision band [" << id.y0 - excision << ", "
          << id.y0 + excision << "]; 1/lambda has a pole at y0";
      throw DomainError(msg.str());
    }
  }

  // cumulative integration outward from the anchor in both directions
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<double> integral(points.size(), 0.0);

  auto split = std::partition_point(order.begin(), order.end(),
                                    [&](std::size_t k) { return points[k] < anchor; });
  double from = anchor;
  double acc = 0.0;
  for (auto it = split; it != order.end(); ++it) {
    const double p = points[*it];
    if (p != from) {
      check_lambda_sign(lambda, id, p);
      acc += inverse_lambda_integral(lambda, from, p, id.y0, opts).value;
    }
    integral[*it] = acc;
    from = p;
  }
  from = anchor;
  acc = 0.0;
  for (auto it = std::make_reverse_iterator(split); it != order.rend(); ++it) {
    const double p = points[*it];
    if (p != from) {
      check_lambda_sign(lambda, id, p);
      acc += inverse_lambda_integral(lambda, from, p, id.y0, opts).value;
    }
    integral[*it] = acc;
    from = p;
  }

  std::vector<double> values(points.size());
  for (std::size_t k = 0; k < points.size(); ++k)
    values[k] = points[k] == anchor ? anchor_value : branch_value(id, anchor_value, integral[k]);
  return values;
}

std::vector<double> reconstruct_upper(const LambdaFn& lambda, const Identification& id, double y1,
                                      double alpha, std::span<const double> points,
                                      double excision, const numerics::QuadratureOptions& opts)
{
  if (!(y1 > id.y0))
    throw DomainError("the scale anchor y1 must lie above y0");
  return reconstruct_branch(lambda, id, y1, alpha, points, excision, opts);
}

Alpha2Result alpha2_limit(const LambdaFn& lambda, const Identification& id, double y1, double y2,
                          double alpha, const Alpha2Options& opts,
                          const numerics::QuadratureOptions& quad)
{
  if (!(y2 < id.y0 && id.y0 < y1))
    throw DomainError("alpha2 needs y2 < y0 < y1");
  if (opts.halvings < 3)
    throw DomainError("alpha2 extrapolation needs at least three halvings");

  double t = opts.t0_fraction * std::min(y1 - id.y0, id.y0 - y2);
  double upper = inverse_lambda_integral(lambda, y1, id.y0 + t, id.y0, quad).value;
  double lower = inverse_lambda_integral(lambda, y2, id.y0 - t, id.y0, quad).value;
  std::vector<double> e{ (id.A + id.B * alpha) * std::exp(id.B * (lower - upper)) };
  std::vector<double> r1;
  Alpha2Result result;

  for (int k = 1; k <= opts.halvings; ++k) {
    const double next = 0.5 * t;
    upper += inverse_lambda_integral(lambda, id.y0 + t, id.y0 + next, id.y0, quad).value;
    lower += inverse_lambda_integral(lambda, id.y0 - t, id.y0 - next, id.y0, quad).value;
    t = next;
    e.push_back((id.A + id.B * alpha) * std::exp(id.B * (lower - upper)));
    // E(t) = L + c1 t + c2 t^2 + ...: two Richardson levels in t
    r1.push_back(2.0 * e[k] - e[k - 1]);
    if (r1.size() >= 2) {
      const double r2 = (4.0 * r1.back() - r1[r1.size() - 2]) / 3.0;
      result.extrapolants.push_back(r2);
    }
    if (result.extrapolants.size() >= 2) {
      const double cur = result.extrapolants.back();
      const double prev = result.extrapolants[result.extrapolants.size() - 2];
      result.last_relative_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
      if (result.last_relative_change < opts.rel_tol) {
        result.halvings_used = k;
        result.value = -(cur + id.A) / id.B;
        return result;
      }
    }
  }
  std::ostringstream msg;
  msg << "alpha2 limit did not converge in " << opts.halvings
      << " halvings (last relative change " << result.last_relative_change << ")";
  throw NumericalError(msg.str());
}

ClosedFormTransform::ClosedFormTransform(LambdaFn lambda, Identification id, double y1,
                                         double alpha, double y2, double alpha2,
                                         numerics::QuadratureOptions opts)
  : lambda_(std::move(lambda))
  , id_(id)
  , y1_(y1)
  , alpha_(alpha)
  , y2_(y2)
  , alpha2_(alpha2)
  , opts_(opts)
{}

double ClosedFormTransform::operator()(double y) const
{
  if (y == id_.y0)
    return -id_.A / id_.B;
  const double anchor = y > id_.y0 ? y1_ : y2_;
  const double value = y > id_.y0 ? alpha_ : alpha2_;
  if (y == anchor)
    return value;
  return branch_value(id_, value, inverse_lambda_integral(lambda_, anchor, y, id_.y0, opts_).value);
}

double ClosedFormTransform::derivative(double y) const
{
  if (y == id_.y0)
    throw DomainError("the closed form gives h'(y0) only as a limit");
  return -(id_.A + id_.B * (*this)(y)) / lambda_(y);
}

std::vector<double> ode_residuals(std::span<const double> grid, std::span<const double> values,
                                  std::span<const double> lambda_values, double A, double B,
                                  std::span<const char> usable)
{
  std::vector<std::size_t> exact;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (usable[k])
      exact.push_back(k);
  std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (exact.size() < 2)
    return out;
  const std::size_t width = std::min<std::size_t>(5, exact.size());
  for (std::size_t e = 0; e < exact.size(); ++e) {
    // stencil of `width` usable points, centred where possible
    std::size_t first = e >= width / 2 ? e - width / 2 : 0;
    first = std::min(first, exact.size() - width);
    std::vector<double> nodes;
    std::vector<double> vals;
    for (std::size_t s = first; s < first + width; ++s) {
      nodes.push_back(grid[exact[s]]);
      vals.push_back(values[exact[s]]);
    }
    const std::size_t k = exact[e];
    const std::vector<double> w = numerics::fornberg_weights(grid[k], nodes, 1);
    double d = 0.0;
    for (std::size_t s = 0; s < width; ++s)
      d += w[s] * vals[s];
    out[k] = std::abs(d * lambda_values[k] + A + B * values[k]);
  }
  return out;
}

ReconstructedTransform reconstruct_global(const LambdaFn& lambda, const Identification& id,
                                          const Canonical& constraints,
                                          std::span<const double> grid,
                                          const ReconstructionOptions& opts)
{
  validate(ConstraintSet{ constraints });
  if (id.B == 0.0 || !std::isfinite(id.B))
    throw IdentificationError("reconstruction needs a finite B != 0");
  const double location = -id.A / id.B;
  if (!(constraints.y1 > id.y0))
    throw DomainError("canonical constraints need y1 > y0");
  if (!(constraints.alpha > location)) {
    std::ostringstream msg;
    msg << "canonical constraints need alpha > -A/B = " << location;
    throw DomainError(msg.str());
  }
  if (grid.size() < 3)
    throw DomainError("reconstruction grid needs at least three points");
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k + 1] > grid[k]))
      throw DomainError("reconstruction grid must be strictly increasing");
  if (!(grid.front() < id.y0 && id.y0 < grid.back()))
    throw DomainError("reconstruction grid must span both sides of y0");

  ReconstructedTransform rt;
  rt.grid.assign(grid.begin(), grid.end());
  rt.y0 = id.y0;
  rt.A = id.A;
  rt.B = id.B;
  rt.y1 = constraints.y1;
  rt.alpha = constraints.alpha;
  rt.y2 = opts.y2.value_or(id.y0 - (constraints.y1 - id.y0));
  if (!(rt.y2 < id.y0))
    throw DomainError("the lower anchor y2 must lie below y0");
  rt.excision = opts.excision_fraction * (grid.back() - grid.front());

  rt.alpha2_info = alpha2_limit(lambda, id, rt.y1, rt.y2, rt.alpha, opts.alpha2, opts.quadrature);
  rt.alpha2 = rt.alpha2_info.value;

  const std::size_t n = grid.size();
  rt.values.assign(n, 0.0);
  rt.derivatives.assign(n, 0.0);
  rt.lambda_values.assign(n, 0.0);
  rt.interpolated.assign(n, 0);

  std::vector<std::size_t> upper_idx;
  std::vector<std::size_t> lower_idx;
  std::vector<double> upper_pts;
  std::vector<double> lower_pts;
  for (std::size_t k = 0; k < n; ++k) {
    if (grid[k] > id.y0 + rt.excision) {
      upper_idx.push_back(k);
      upper_pts.push_back(grid[k]);
    } else if (grid[k] < id.y0 - rt.excision) {
      lower_idx.push_back(k);
      lower_pts.push_back(grid[k]);
    }
  }
  const auto upper_vals =
    reconstruct_branch(lambda, id, rt.y1, rt.alpha, upper_pts, rt.excision, opts.quadrature);
  const auto lower_vals =
    reconstruct_branch(lambda, id, rt.y2, rt.alpha2, lower_pts, rt.excision, opts.quadrature);
  for (std::size_t j = 0; j < upper_idx.size(); ++j)
    rt.values[upper_idx[j]] = upper_vals[j];
  for (std::size_t j = 0; j < lower_idx.size(); ++j)
    rt.values[lower_idx[j]] = lower_vals[j];

  const ClosedFormTransform closed(lambda, id, rt.y1, rt.alpha, rt.y2, rt.alpha2, opts.quadrature);

  // points inside the band: exact value at y0, monotone cubic elsewhere
  const double lo_edge = id.y0 - rt.excision;
  const double hi_edge = id.y0 + rt.excision;
  bool band_ready = false;
  double h_lo = 0.0, h_hi = 0.0, d_lo = 0.0, d_hi = 0.0, d_mid = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (grid[k] < lo_edge || grid[k] > hi_edge)
      continue;
    if (grid[k] == id.y0) {
      rt.values[k] = location;
      continue;
    }
    if (!band_ready) {
      h_lo = closed(lo_edge);
      h_hi = closed(hi_edge);
      d_lo = closed.derivative(lo_edge);
      d_hi = closed.derivative(hi_edge);
      d_mid = (h_hi - h_lo) / (hi_edge - lo_edge);
      band_ready = true;
    }
    double da = grid[k] < id.y0 ? d_lo : d_mid;
    double db = grid[k] < id.y0 ? d_mid : d_hi;
    const double xa = grid[k] < id.y0 ? lo_edge : id.y0;
    const double xb = grid[k] < id.y0 ? id.y0 : hi_edge;
    const double ya = grid[k] < id.y0 ? h_lo : location;
    const double yb = grid[k] < id.y0 ? location : h_hi;
    numerics::limit_monotone_slopes(xa, xb, ya, yb, da, db);
    rt.values[k] = numerics::hermite(xa, xb, ya, yb, da, db, grid[k]);
    rt.derivatives[k] = numerics::hermite_derivative(xa, xb, ya, yb, da, db, grid[k]);
    rt.interpolated[k] = 1;
  }

  for (std::size_t k = 0; k < n; ++k) {
    rt.lambda_values[k] = grid[k] == id.y0 ? 0.0 : lambda(grid[k]);
    if (!rt.interpolated[k] && grid[k] != id.y0)
      rt.derivatives[k] = -(id.A + id.B * rt.values[k]) / rt.lambda_values[k];
  }

  // one-sided second-order difference quotients at y0
  const double t = 1e-3 * (grid.back() - grid.front());
  rt.right_slope = (-3.0 * location + 4.0 * closed(id.y0 + t) - closed(id.y0 + 2.0 * t)) / (2.0 * t);
  rt.left_slope = (3.0 * location - 4.0 * closed(id.y0 - t) + closed(id.y0 - 2.0 * t)) / (2.0 * t);
  for (std::size_t k = 0; k < n; ++k)
    if (grid[k] == id.y0)
      rt.derivatives[k] = 0.5 * (rt.left_slope + rt.right_slope);

  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (rt.values[k + 1] > rt.values[k])
      continue;
    if (!opts.repair_monotonicity) {
      std::ostringstream msg;
      msg << "reconstruction is not increasing between y = " << grid[k] << " and " << grid[k + 1]
          << " (h = " << rt.values[k] << ", " << rt.values[k + 1] << ")";
      throw NumericalError(msg.str());
    }
    const std::vector<double> fitted = numerics::isotonic_increasing(rt.values);
    for (std::size_t j = 0; j < n; ++j)
      if (fitted[j] != rt.values[j])
        ++rt.repaired_points;
    rt.values = fitted;
    break;
  }

  std::vector<char> usable(n);
  for (std::size_t k = 0; k < n; ++k)
    usable[k] = !rt.interpolated[k];
  rt.residuals = ode_residuals(rt.grid, rt.values, rt.lambda_values, id.A, id.B, usable);
  return rt;
}

namespace {

// normalised closed form (A = 0, h(y1) = 1) used to translate general
// constraints into a canonical pair
struct NormalisedForm
{
  ClosedFormTransform closed;
  double y1;
};

NormalisedForm normalised_form(const LambdaFn& lambda, const Identification& id,
                               std::span<const double> grid, const ReconstructionOptions& opts)
{
  // anchors symmetric about y0 and inside the grid
  const double y1 = id.y0 + 0.5 * std::min(grid.back() - id.y0, id.y0 - grid.front());
  const double y2 = opts.y2.value_or(id.y0 - (y1 - id.y0));
  const Identification norm{ id.y0, 0.0, id.B };
  const Alpha2Result a2 = alpha2_limit(lambda, norm, y1, y2, 1.0, opts.alpha2, opts.quadrature);
  return { ClosedFormTransform(lambda, norm, y1, 1.0, y2, a2.value, opts.quadrature), y1 };
}

} // namespace

ReconstructedTransform reconstruct_constrained(const LambdaFn& lambda, const Identification& id,
                                               const ConstraintSet& constraints,
                                               std::span<const double> grid,
                                               const ReconstructionOptions& opts)
{
  validate(constraints);
  if (const auto* c = std::get_if<Canonical>(&constraints))
    return reconstruct_global(lambda, id, *c, grid, opts);
  if (grid.size() < 3 || !(grid.front() < id.y0 && id.y0 < grid.back()))
    throw DomainError("reconstruction grid must span both sides of y0");

  const NormalisedForm form = normalised_form(lambda, id, grid, opts);
  // h = c + k h_n, so h(y0) = c and h(y1) = c + k
  double k = 0.0;
  double c = 0.0;
  if (const auto* tp = std::get_if<TwoPoint>(&constraints)) {
    const double ha = form.closed(tp->ya);
    const double hb = form.closed(tp->yb);
    if (!(hb > ha))
      throw DomainError("two-point constraints: normalised transform is not increasing between ya and yb");
    k = (tp->alpha_b - tp->alpha_a) / (hb - ha);
    c = tp->alpha_a - k * ha;
  } else {
    const auto& ps = std::get<PointSlope>(constraints);
    if (ps.ya == id.y0)
      throw DomainError("point-plus-slope anchor at y0: the slope is only available as a limit");
    const double ha = form.closed(ps.ya);
    const double da = form.closed.derivative(ps.ya);
    if (!(da > 0.0))
      throw DomainError("point-plus-slope constraints: normalised derivative is not positive");
    k = ps.slope / da;
    c = ps.alpha_a - k * ha;
  }
  const Identification shifted{ id.y0, -id.B * c, id.B };
  return reconstruct_global(lambda, shifted, Canonical{ form.y1, c + k }, grid, opts);
}

double ReconstructedTransform::max_residual() const
{
  double m = 0.0;
  for (std::size_t k = 0; k < residuals.size(); ++k)
    if (!interpolated[k] && std::isfinite(residuals[k]))
      m = std::max(m, residuals[k]);
  return m;
}

double ReconstructedTransform::max_scaled_residual() const
{
  double m = 0.0;
  for (std::size_t k = 0; k < residuals.size(); ++k)
    if (!interpolated[k] && std::isfinite(residuals[k]))
      m = std::max(m, residuals[k] / (1.0 + std::abs(values[k])));
  return m;
}

double ReconstructedTransform::value_at(double y) const
{
  if (y < grid.front() || y > grid.back())
    throw DomainError("evaluation point outside the reconstructed grid");
  auto it = std::lower_bound(grid.begin(), grid.end(), y);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i < grid.size() && grid[i] == y)
    return values[i];
  i -= 1;
  return numerics::hermite(grid[i], grid[i + 1], values[i], values[i + 1], derivatives[i],
                           derivatives[i + 1], y);
}

double ReconstructedTransform::derivative_at(double y) const
{
  if (y < grid.front() || y > grid.back())
    throw DomainError("evaluation point outside the reconstructed grid");
  auto it = std::lower_bound(grid.begin(), grid.end(), y);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i < grid.size() && grid[i] == y)
    return derivatives[i];
  i -= 1;
  return numerics::hermite_derivative(grid[i], grid[i + 1], values[i], values[i + 1],
                                      derivatives[i], derivatives[i + 1], y);
}

std::vector<double> remap_constraints(const ReconstructedTransform& rt, const ConstraintSet& target)
{
  validate(target);
  auto inside = [&](double y) {
    if (y < rt.grid.front() || y > rt.grid.back()) {
      std::ostringstream msg;
      msg << "constraint point " << y << " outside the reconstructed range [" << rt.grid.front()
          << ", " << rt.grid.back() << "]";
      throw DomainError(msg.str());
    }
  };
  // new = anchor_value + scale * (old - anchor_old)
  double anchor_old = 0.0;
  double anchor_new = 0.0;
  double scale = 1.0;
  std::visit(Overloaded{
               [&](const Canonical& c) {
                 const double location = -rt.A / rt.B;
                 const double h1 = c.y1 == rt.y1 ? rt.alpha : (inside(c.y1), rt.value_at(c.y1));
                 if (!(c.alpha > location) || h1 == location)
                   throw DomainError("degenerate canonical remap");
                 anchor_old = location;
                 anchor_new = location;
                 scale = (c.alpha - location) / (h1 - location);
               },
               [&](const TwoPoint& c) {
                 inside(c.ya);
                 inside(c.yb);
                 const double ha = rt.value_at(c.ya);
                 const double hb = rt.value_at(c.yb);
                 if (hb == ha)
                   throw DomainError("degenerate two-point remap: h(ya) == h(yb)");
                 anchor_old = ha;
                 anchor_new = c.alpha_a;
                 scale = (c.alpha_b - c.alpha_a) / (hb - ha);
               },
               [&](const PointSlope& c) {
                 inside(c.ya);
                 const double da = rt.derivative_at(c.ya);
                 if (!(da > 0.0))
                   throw DomainError("degenerate point-plus-slope remap: h'(ya) <= 0");
                 anchor_old = rt.value_at(c.ya);
                 anchor_new = c.alpha_a;
                 scale = c.slope / da;
               } },
             target);
  std::vector<double> out(rt.values.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = scale == 1.0 && anchor_old == anchor_new
               ? rt.values[k]
               : anchor_new + scale * (rt.values[k] - anchor_old);
  return out;
}

GSigma recover_g_sigma_oracle(const ScalarFn& h_hat, const TransformationModel& model,
                              std::span<const double> x)
{
  const double g = model.g(x);
  const double s = model.sigma(x);
  if (!(s > 0.0))
    throw DomainError("sigma(x) must be positive");
  const ErrorDistribution& err = model.error();
  auto transformed = [&](double z) { return h_hat(model.h_inverse(g + s * z)); };
  numerics::QuadratureOptions opts{ 1e-12, 1e-12, 4000 };
  const double cuts[] = { -40.0, -8.0, 0.0, 8.0, 40.0 };
  double mean = 0.0;
  for (int k = 0; k < 4; ++k)
    mean += numerics::integrate([&](double z) { return transformed(z) * err.pdf(z); }, cuts[k],
                                cuts[k + 1], opts)
              .value;
  double var = 0.0;
  for (int k = 0; k < 4; ++k)
    var += numerics::integrate(
             [&](double z) {
               const double d = transformed(z) - mean;
               return d * d * err.pdf(z);
             },
             cuts[k], cuts[k + 1], opts)
             .value;
  if (!(var > 0.0))
    throw NumericalError("conditional variance of h(Y) is not positive");
  return { mean, std::sqrt(var) };
}

GSigma recover_g_sigma_samples(const ScalarFn& h_hat, const SampleSet& samples,
                               std::span<const double> bandwidth, std::span<const double> x,
                               double min_effective)
{
  if (bandwidth.size() != samples.dim() || x.size() != samples.dim())
    throw DomainError("bandwidth and query dimension must match the samples");
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  double mass = 0.0;
  double s1 = 0.0;
  std::vector<double> w(samples.size());
  std::vector<double> hv(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    double k = 1.0;
    for (std::size_t d = 0; d < samples.dim(); ++d) {
      const double u = (x[d] - samples.x(j)[d]) / bandwidth[d];
      k *= inv_sqrt_2pi * std::exp(-0.5 * u * u);
    }
    w[j] = k;
    if (k == 0.0)
      continue;
    hv[j] = h_hat(samples.y(j));
    mass += k;
    s1 += k * hv[j];
  }
  if (mass < min_effective) {
    std::ostringstream msg;
    msg << "effective local sample size " << mass << " below " << min_effective
        << "; increase the covariate bandwidth (about x" << min_effective / std::max(mass, 1e-12)
        << ")";
    throw ConfigError(msg.str());
  }
  const double mean = s1 / mass;
  double var = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j)
    if (w[j] != 0.0)
      var += w[j] * (hv[j] - mean) * (hv[j] - mean);
  var /= mass;
  if (!(var > 0.0))
    throw NumericalError("local variance of h(Y) is not positive");
  return { mean, std::sqrt(var) };
}

std::string reconstruction_to_csv(const ReconstructedTransform& rt)
{
  std::string out = "y,h,residual,interpolated_flag\n";
  for (std::size_t k = 0; k < rt.grid.size(); ++k)
    out += format_double(rt.grid[k]) + "," + format_double(rt.values[k]) + "," +
           format_double(rt.residuals[k]) + "," + (rt.interpolated[k] ? "1" : "0") + "\n";
  return out;
}

Metadata reconstruction_metadata(const ReconstructedTransform& rt, const ConstraintSet& constraints,
                                 const ReconstructionOptions& opts)
{
  return {
    { "A", format_double(rt.A) },
    { "B", format_double(rt.B) },
    { "y0", format_double(rt.y0) },
    { "y1", format_double(rt.y1) },
    { "alpha", format_double(rt.alpha) },
    { "y2", format_double(rt.y2) },
    { "alpha2", format_double(rt.alpha2) },
    { "alpha2.halvings", std::to_string(rt.alpha2_info.halvings_used) },
    { "alpha2.relative_change", format_double(rt.alpha2_info.last_relative_change) },
    { "constraints", describe(constraints) },
    { "excision", format_double(rt.excision) },
    { "quadrature.abs_tol", format_double(opts.quadrature.abs_tol) },
    { "quadrature.rel_tol", format_double(opts.quadrature.rel_tol) },
    { "residual_tol", format_double(opts.residual_tol) },
    { "max_residual", format_double(rt.max_residual()) },
    { "left_slope", format_double(rt.left_slope) },
    { "right_slope", format_double(rt.right_slope) },
    { "repaired_points", std::to_string(rt.repaired_points) },
  };
}

} // namespace trafoid
