#include "trafoid/lambda.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trafoid/error.hpp"
#include "trafoid/samples.hpp"

namespace trafoid {

double lambda_tilde(double dF_dxi, double dF_dy, double floor)
{
  if (!(dF_dy > floor)) {
    std::ostringstream msg;
    msg << "conditional density dF/dy = " << dF_dy << " is not above the floor " << floor
        << " (degenerate density)";
    throw IdentificationError(msg.str());
  }
  return dF_dxi / dF_dy;
}

LambdaTildeFn oracle_lambda_tilde(const TransformationModel& model, std::size_t index)
{
  if (index >= model.dim())
    throw DomainError("lambda-tilde coordinate index outside the covariate dimension");
  // f_eps cancels in the ratio, so the tails stay finite where both
  // partials underflow
  return [model, index](double y, std::span<const double> x) {
    const double s = model.sigma(x);
    if (!(s > 0.0))
      throw DomainError("sigma(x) must be positive");
    const double dh = model.dh(y);
    if (!(dh > 0.0))
      throw IdentificationError("h'(y) is not positive");
    return -(s * model.dg(x, index) + (model.h(y) - model.g(x)) * model.dsigma(x, index)) /
           (dh * s);
  };
}

numerics::QuadratureResult integrate_lambda(const LambdaTildeFn& lt, const WeightFunction& weight,
                                            double y, const numerics::QuadratureOptions& opts)
{
  const Box& box = weight.support();
  auto integrand = [&](std::span<const double> x) { return weight(x) * lt(y, x); };
  numerics::QuadratureResult r = numerics::integrate_box(integrand, box.lower, box.upper, opts);
  if (!r.converged || !std::isfinite(r.value)) {
    std::ostringstream msg;
    msg << "lambda quadrature at y = " << y << " did not converge (value " << r.value
        << ", error estimate " << r.error << ", tolerance " << opts.abs_tol << ")";
    throw NumericalError(msg.str());
  }
  return r;
}

CoefficientPair compute_coefficients(const TransformationModel& model, const WeightFunction& weight,
                                     const numerics::QuadratureOptions& opts)
{
  const Box& box = weight.support();
  const std::size_t i = weight.index();
  if (box.dim() != model.dim())
    throw DomainError("weight dimension does not match the model");
  auto a_integrand = [&](std::span<const double> x) {
    const double s = model.sigma(x);
    return weight(x) * (s * model.dg(x, i) - model.g(x) * model.dsigma(x, i)) / s;
  };
  auto b_integrand = [&](std::span<const double> x) {
    return weight(x) * model.dsigma(x, i) / model.sigma(x);
  };
  const auto a = numerics::integrate_box(a_integrand, box.lower, box.upper, opts);
  const auto b = numerics::integrate_box(b_integrand, box.lower, box.upper, opts);
  if (!a.converged || !b.converged)
    throw NumericalError("quadrature of the A/B coefficients did not converge");
  return { a.value, b.value };
}

CoefficientPair coefficients_AB(const TransformationModel& model, const WeightFunction& weight,
                                const numerics::QuadratureOptions& opts, double b_floor)
{
  const CoefficientPair c = compute_coefficients(model, weight, opts);
  if (std::abs(c.B) < b_floor) {
    std::ostringstream msg;
    msg << "|B| = " << std::abs(c.B) << " below " << b_floor
        << ": the model is not heteroscedastic on the weight support; run the "
           "homoscedasticity diagnostic";
    throw IdentificationError(msg.str());
  }
  return c;
}

Crossing select_crossing(std::span<const double> grid, std::span<const double> values)
{
  const auto changes = numerics::sign_changes(values);
  if (changes.empty())
    throw IdentificationError("lambda has no sign change on the grid (possible homoscedasticity)");
  std::vector<Crossing> crossings;
  for (std::size_t i : changes) {
    const double v0 = values[i];
    const double v1 = values[i + 1];
    const double t = v0 / (v0 - v1);
    crossings.push_back({ i, grid[i] + t * (grid[i + 1] - grid[i]) });
  }
  if (crossings.size() == 1)
    return crossings.front();

  std::vector<double> locs;
  for (const Crossing& c : crossings)
    locs.push_back(c.location);
  std::sort(locs.begin(), locs.end());
  const std::size_t m = locs.size();
  const double median = m % 2 ? locs[m / 2] : 0.5 * (locs[m / 2 - 1] + locs[m / 2]);
  return *std::min_element(crossings.begin(), crossings.end(), [median](const Crossing& a, const Crossing& b) {
    return std::abs(a.location - median) < std::abs(b.location - median);
  });
}

double find_y0(const LambdaFn& lambda, double lo, double hi, std::size_t scan_points,
               const numerics::RootOptions& opts)
{
  if (!(hi > lo) || scan_points < 2)
    throw DomainError("root search interval must be nondegenerate");
  const std::vector<double> grid = uniform_grid(lo, hi, scan_points);
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    values[k] = lambda(grid[k]);
  Crossing c;
  try {
    c = select_crossing(grid, values);
  } catch (const IdentificationError&) {
    std::ostringstream msg;
    msg << "lambda has no sign change on [" << lo << ", " << hi << "]";
    throw IdentificationError(msg.str());
  }
  if (values[c.index + 1] == 0.0)
    return grid[c.index + 1];
  return numerics::find_root(lambda, grid[c.index], grid[c.index + 1], opts).root;
}

numerics::DerivativeEstimate recover_B(const LambdaFn& lambda, double y0, double step)
{
  numerics::DerivativeEstimate d = numerics::richardson_derivative(lambda, y0, step);
  if (!std::isfinite(d.value))
    throw NumericalError("non-finite difference quotients of lambda at y0");
  d.value = -d.value;
  return d;
}

std::string to_string(HeteroscedasticityVerdict v)
{
  switch (v) {
    case HeteroscedasticityVerdict::homoscedastic_consistent:
      return "homoscedastic-consistent";
    case HeteroscedasticityVerdict::heteroscedastic:
      return "heteroscedastic";
    case HeteroscedasticityVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

HeteroscedasticityVerdict homoscedasticity_diagnostic(const LambdaTildeGrid& grid,
                                                      double noise_multiplier)
{
  if (grid.x_points.empty() || grid.y.empty())
    throw DomainError("homoscedasticity diagnostic needs a nonempty grid");
  if (grid.y.size() < 20)
    throw DomainError("homoscedasticity diagnostic needs at least 20 y-points per x");
  if (grid.values.size() != grid.x_points.size() || grid.noise.size() != grid.x_points.size())
    throw DomainError("lambda-tilde grid shape mismatch");

  bool any_significant = false;
  for (std::size_t j = 0; j < grid.x_points.size(); ++j) {
    bool positive = false;
    bool negative = false;
    for (std::size_t k = 0; k < grid.y.size(); ++k) {
      const double v = grid.values[j][k];
      if (!std::isfinite(v) || std::abs(v) <= noise_multiplier * grid.noise[j][k])
        continue;
      any_significant = true;
      (v > 0.0 ? positive : negative) = true;
    }
    if (positive && negative)
      return HeteroscedasticityVerdict::heteroscedastic;
  }
  return any_significant ? HeteroscedasticityVerdict::homoscedastic_consistent
                         : HeteroscedasticityVerdict::inconclusive;
}

LambdaTildeGrid oracle_lambda_tilde_grid(const TransformationModel& model, std::size_t index,
                                         std::span<const double> ys,
                                         const std::vector<std::vector<double>>& xs, double noise)
{
  const LambdaTildeFn lt = oracle_lambda_tilde(model, index);
  LambdaTildeGrid grid;
  grid.y.assign(ys.begin(), ys.end());
  grid.x_points = xs;
  for (const auto& x : xs) {
    std::vector<double> row;
    for (double y : ys)
      row.push_back(lt(y, x));
    grid.values.push_back(std::move(row));
    grid.noise.emplace_back(ys.size(), noise);
  }
  return grid;
}

std::vector<double> LambdaField::tabulate() const
{
  std::vector<double> out;
  out.reserve(grid.size());
  for (double y : grid)
    out.push_back(lambda(y));
  return out;
}

LambdaField oracle_lambda_field(const TransformationModel& model, const WeightFunction& weight,
                                const OracleFieldOptions& opts)
{
  LambdaField field;
  field.lambda_tilde = oracle_lambda_tilde(model, weight.index());
  field.quadrature_tol = opts.quadrature.abs_tol;
  // the closure owns copies so the field outlives the arguments
  field.lambda = [lt = field.lambda_tilde, weight, q = opts.quadrature](double y) {
    return integrate_lambda(lt, weight, y, q).value;
  };
  field.y0 = find_y0(field.lambda, opts.search_lower, opts.search_upper);
  field.grid = centered_grid(field.y0, opts.grid_half_width, opts.grid_points);
  return field;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points)
{
  if (points < 2)
    throw DomainError("a grid needs at least two points");
  std::vector<double> g(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = lo + step * static_cast<double>(k);
  g.back() = hi;
  return g;
}

std::vector<double> centered_grid(double center, double half_width, std::size_t points)
{
  if (points < 2)
    throw DomainError("a grid needs at least two points");
  std::vector<double> g(points);
  const double mid = 0.5 * static_cast<double>(points - 1);
  const double step = 2.0 * half_width / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = center + (static_cast<double>(k) - mid) * step;
  return g;
}

std::string lambda_to_csv(std::span<const double> grid, std::span<const double> values)
{
  std::string out = "y,lambda\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    out += format_double(grid[k]) + "," + format_double(values[k]) + "\n";
  return out;
}

} // namespace trafoid
