#include "trafoid/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trafoid/error.hpp"
#include "trafoid/numerics/quadrature.hpp"
#include "trafoid/numerics/roots.hpp"

namespace trafoid {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kInvSqrt2 = 0.707106781186547524400844362105;
// kernel weights beyond 8 bandwidths are below 1e-14 of the peak
constexpr double kKernelCutoff = 8.0;
constexpr double kCdfCutoff = 9.0;

double sample_sd(std::span<const double> v)
{
  if (v.size() < 2)
    return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// linear interpolation between order statistics (type 7)
double quantile_sorted(std::span<const double> sorted, double p)
{
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> trimmed_range(const SampleSet& samples, double lo, double hi)
{
  if (!(0.0 <= lo && lo < hi && hi <= 1.0))
    throw ConfigError("trimming quantiles must satisfy 0 <= lower < upper <= 1");
  std::vector<double> ys(samples.ys().begin(), samples.ys().end());
  std::sort(ys.begin(), ys.end());
  return { quantile_sorted(ys, lo), quantile_sorted(ys, hi) };
}

// tensor-product GL3 rule over the weight box with panel width <= bandwidth
struct CovariateRule
{
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
};

CovariateRule covariate_rule(const WeightFunction& weight, std::span<const double> bandwidth)
{
  const Box& box = weight.support();
  CovariateRule rule;
  rule.nodes.emplace_back();
  rule.weights.push_back(1.0);
  for (std::size_t d = 0; d < box.dim(); ++d) {
    const double width = box.upper[d] - box.lower[d];
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(width / bandwidth[d])));
    const auto axis = numerics::composite_gauss_legendre(box.lower[d], box.upper[d], panels, 3);
    CovariateRule next;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      for (std::size_t j = 0; j < axis.nodes.size(); ++j) {
        auto node = rule.nodes[k];
        node.push_back(axis.nodes[j]);
        next.nodes.push_back(std::move(node));
        next.weights.push_back(rule.weights[k] * axis.weights[j]);
      }
    rule = std::move(next);
  }
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    rule.weights[k] *= weight(rule.nodes[k]);
  return rule;
}

int sign_of(double v)
{
  return (v > 0.0) - (v < 0.0);
}

} // namespace

double rule_of_thumb(std::span<const double> values, double c, std::size_t dim)
{
  const double s = sample_sd(values);
  if (!(s > 0.0))
    throw ConfigError("rule-of-thumb bandwidth needs a coordinate with positive spread");
  const double n = static_cast<double>(values.size());
  return c * s * std::pow(n, -1.0 / (4.0 + static_cast<double>(dim)));
}

Bandwidths resolve_bandwidths(const SampleSet& samples, const KernelConfig& config)
{
  if (!(config.cx > 0.0) || !(config.cy > 0.0))
    throw ConfigError("bandwidth constants kernel.cx and kernel.cy must be positive");
  Bandwidths bw;
  const std::size_t d = samples.dim();
  if (!config.bandwidth_x.empty()) {
    if (config.bandwidth_x.size() != d && config.bandwidth_x.size() != 1)
      throw ConfigError("kernel.bandwidth_x needs one value or one per covariate");
    for (std::size_t k = 0; k < d; ++k)
      bw.x.push_back(config.bandwidth_x.size() == 1 ? config.bandwidth_x[0] : config.bandwidth_x[k]);
  } else {
    std::vector<double> column(samples.size());
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t j = 0; j < samples.size(); ++j)
        column[j] = samples.x(j)[k];
      bw.x.push_back(rule_of_thumb(column, config.cx, d));
    }
  }
  bw.y = config.bandwidth_y ? *config.bandwidth_y : rule_of_thumb(samples.ys(), config.cy, d);
  for (double b : bw.x)
    if (!(b > 0.0))
      throw ConfigError("covariate bandwidths must be positive");
  if (!(bw.y > 0.0))
    throw ConfigError("kernel.bandwidth_y must be positive");
  return bw;
}

ConditionalCdfEstimator::ConditionalCdfEstimator(const SampleSet& samples, Bandwidths bandwidths,
                                                 double min_effective, double density_floor)
  : samples_(samples)
  , bw_(std::move(bandwidths))
  , min_effective_(min_effective)
  , density_floor_(density_floor)
{
  if (samples_.size() == 0)
    throw ConfigError("kernel estimation needs at least one sample");
  samples_.check_finite();
  if (bw_.x.size() != samples_.dim())
    throw ConfigError("one covariate bandwidth per coordinate is required");
  for (double b : bw_.x)
    if (!(b > 0.0))
      throw ConfigError("covariate bandwidths must be positive");
  if (!(bw_.y > 0.0))
    throw ConfigError("the response bandwidth must be positive");
}

ConditionalCdfEstimator::ConditionalCdfEstimator(const SampleSet& samples, const KernelConfig& config)
  : ConditionalCdfEstimator(samples, resolve_bandwidths(samples, config), config.min_effective,
                            config.density_floor)
{}

LocalWeights ConditionalCdfEstimator::local_weights(std::span<const double> x,
                                                    std::size_t index) const
{
  const std::size_t d = samples_.dim();
  if (x.size() != d)
    throw DomainError("query point dimension does not match the samples");
  if (index >= d)
    throw DomainError("covariate index outside the sample dimension");
  LocalWeights lw;
  std::vector<double> dk;
  double dmass = 0.0;
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    const auto xj = samples_.x(j);
    double k = 1.0;
    double ui = 0.0;
    bool inside = true;
    for (std::size_t c = 0; c < d; ++c) {
      const double u = (x[c] - xj[c]) / bw_.x[c];
      if (std::abs(u) > kKernelCutoff) {
        inside = false;
        break;
      }
      k *= kInvSqrt2Pi * std::exp(-0.5 * u * u);
      if (c == index)
        ui = u;
    }
    if (!inside)
      continue;
    const double kd = -k * ui / bw_.x[index];
    lw.index.push_back(j);
    lw.w.push_back(k);
    dk.push_back(kd);
    lw.mass += k;
    dmass += kd;
  }
  if (lw.mass < min_effective_) {
    std::ostringstream msg;
    msg << "effective local sample size " << lw.mass << " at x = (";
    for (std::size_t c = 0; c < d; ++c)
      msg << (c ? ", " : "") << x[c];
    const double factor = min_effective_ / std::max(lw.mass, 1e-12);
    msg << ") is below the floor " << min_effective_ << "; try a covariate bandwidth of about "
        << bw_.x[index] * std::min(factor, 10.0);
    throw ConfigError(msg.str());
  }
  lw.c.resize(lw.w.size());
  for (std::size_t k = 0; k < lw.w.size(); ++k) {
    lw.w[k] /= lw.mass;
    lw.c[k] = (dk[k] - lw.w[k] * dmass) / lw.mass;
  }
  return lw;
}

PartialEstimate ConditionalCdfEstimator::evaluate(const LocalWeights& lw, double y) const
{
  const std::size_t m = lw.index.size();
  std::vector<double> Phi(m);
  std::vector<double> phi(m);
  PartialEstimate out;
  for (std::size_t k = 0; k < m; ++k) {
    const double z = (y - samples_.y(lw.index[k])) / bw_.y;
    if (z > kCdfCutoff) {
      Phi[k] = 1.0;
      phi[k] = 0.0;
    } else if (z < -kCdfCutoff) {
      Phi[k] = 0.0;
      phi[k] = 0.0;
    } else {
      Phi[k] = 0.5 * std::erfc(-z * kInvSqrt2);
      phi[k] = kInvSqrt2Pi * std::exp(-0.5 * z * z) / bw_.y;
    }
    out.cdf += lw.w[k] * Phi[k];
    out.dF_dy += lw.w[k] * phi[k];
    out.dF_dxi += lw.c[k] * Phi[k];
  }
  if (!(out.dF_dy > density_floor_)) {
    std::ostringstream msg;
    msg << "estimated conditional density " << out.dF_dy << " at y = " << y
        << " is below the floor " << density_floor_ << " (degenerate density)";
    throw IdentificationError(msg.str());
  }
  out.lambda_tilde = out.dF_dxi / out.dF_dy;
  double var = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double psi =
      (lw.c[k] * (Phi[k] - out.cdf) - out.lambda_tilde * lw.w[k] * (phi[k] - out.dF_dy)) / out.dF_dy;
    var += psi * psi;
  }
  out.lambda_tilde_se = std::sqrt(var);
  return out;
}

double ConditionalCdfEstimator::cdf(double y, std::span<const double> x) const
{
  const LocalWeights lw = local_weights(x, 0);
  double F = 0.0;
  for (std::size_t k = 0; k < lw.index.size(); ++k) {
    const double z = (y - samples_.y(lw.index[k])) / bw_.y;
    F += lw.w[k] * (z > kCdfCutoff ? 1.0 : z < -kCdfCutoff ? 0.0 : 0.5 * std::erfc(-z * kInvSqrt2));
  }
  return std::clamp(F, 0.0, 1.0);
}

PartialEstimate ConditionalCdfEstimator::partials(double y, std::span<const double> x,
                                                  std::size_t index) const
{
  return evaluate(local_weights(x, index), y);
}

double estimated_lambda_at(const ConditionalCdfEstimator& estimator, const WeightFunction& weight,
                           double y)
{
  const CovariateRule rule = covariate_rule(weight, estimator.bandwidths().x);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    if (rule.weights[k] == 0.0)
      continue;
    sum += rule.weights[k] * estimator.partials(y, rule.nodes[k], weight.index()).lambda_tilde;
  }
  return sum;
}

double LambdaEstimate::operator()(double y) const
{
  if (std::abs(y - y0) < window)
    return -B * (y - y0);
  if (y < grid.front() || y > grid.back()) {
    std::ostringstream msg;
    msg << "lambda-hat queried at y = " << y << " outside its tabulated range [" << grid.front()
        << ", " << grid.back() << "]";
    throw DomainError(msg.str());
  }
  return spline(y);
}

LambdaFn LambdaEstimate::function() const
{
  return [self = *this](double y) { return self(y); };
}

LambdaEstimate estimate_lambda(const SampleSet& samples, const KernelConfig& kernel,
                               const WeightFunction& weight, const LambdaEstimateOptions& opts)
{
  if (samples.size() < opts.min_samples) {
    std::ostringstream msg;
    msg << "estimation needs at least " << opts.min_samples << " samples, got " << samples.size();
    throw ConfigError(msg.str());
  }
  if (weight.support().dim() != samples.dim())
    throw ConfigError("weight box dimension does not match the sample covariates");
  if (opts.grid_points < 2 * static_cast<std::size_t>(std::ceil(opts.slope_window)) + 3)
    throw ConfigError("estimate.grid_points is too small for the slope window");

  const ConditionalCdfEstimator est(samples, kernel);
  LambdaEstimate out;
  out.bandwidths = est.bandwidths();
  const auto [lo, hi] = trimmed_range(samples, opts.trim_lower, opts.trim_upper);
  out.grid = uniform_grid(lo, hi, opts.grid_points);

  const CovariateRule rule = covariate_rule(weight, out.bandwidths.x);
  std::vector<LocalWeights> locals;
  std::vector<double> node_weights;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    if (rule.weights[k] == 0.0)
      continue;
    locals.push_back(est.local_weights(rule.nodes[k], weight.index()));
    node_weights.push_back(rule.weights[k]);
  }
  out.values.resize(out.grid.size());
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t k = 0; k < locals.size(); ++k)
      sum += node_weights[k] * est.evaluate(locals[k], out.grid[g]).lambda_tilde;
    out.values[g] = sum;
  }

  out.crossings = numerics::sign_changes(out.values).size();
  Crossing crossing;
  try {
    crossing = select_crossing(out.grid, out.values);
  } catch (const IdentificationError&) {
    throw IdentificationError(
      "lambda-hat has no sign change on the trimmed grid; the data may be homoscedastic "
      "(run the homoscedasticity diagnostic)");
  }
  out.spline = numerics::CubicSpline(out.grid, out.values);
  const auto& spline = out.spline;
  const double a = out.grid[crossing.index];
  const double b = out.grid[crossing.index + 1];
  out.y0 = spline(a) == 0.0 ? a
           : spline(b) == 0.0
             ? b
             : numerics::find_root([&](double y) { return spline(y); }, a, b, { 1e-12, 200 }).root;

  const double spacing = out.grid[1] - out.grid[0];
  out.window = opts.slope_window * spacing;
  if (out.y0 - out.window < out.grid.front() || out.y0 + out.window > out.grid.back()) {
    std::ostringstream msg;
    msg << "estimated root y0 = " << out.y0 << " is within the slope window of the trimmed range";
    throw IdentificationError(msg.str());
  }
  out.B = -(spline(out.y0 + out.window) - spline(out.y0 - out.window)) / (2.0 * out.window);
  if (!std::isfinite(out.B) || std::abs(out.B) < opts.b_floor) {
    std::ostringstream msg;
    msg << "estimated B = " << out.B << " is below the floor " << opts.b_floor
        << " (possible homoscedasticity)";
    throw IdentificationError(msg.str());
  }
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    if (std::abs(out.grid[g] - out.y0) <= out.window)
      continue;
    const int expected = out.grid[g] > out.y0 ? -sign_of(out.B) : sign_of(out.B);
    if (sign_of(out.values[g]) != expected)
      ++out.sign_violations;
  }
  return out;
}

LambdaTildeGrid sample_lambda_tilde_grid(const ConditionalCdfEstimator& estimator,
                                         std::size_t index, std::span<const double> ys,
                                         const std::vector<std::vector<double>>& xs)
{
  LambdaTildeGrid grid;
  grid.y.assign(ys.begin(), ys.end());
  grid.x_points = xs;
  for (const auto& x : xs) {
    const LocalWeights lw = estimator.local_weights(x, index);
    std::vector<double> row;
    std::vector<double> noise;
    for (double y : ys) {
      const PartialEstimate p = estimator.evaluate(lw, y);
      row.push_back(p.lambda_tilde);
      noise.push_back(p.lambda_tilde_se);
    }
    grid.values.push_back(std::move(row));
    grid.noise.push_back(std::move(noise));
  }
  return grid;
}

HeteroscedasticityVerdict sample_homoscedasticity_diagnostic(const SampleSet& samples,
                                                             const KernelConfig& kernel,
                                                             const WeightFunction& weight,
                                                             const SampleDiagnosticOptions& opts)
{
  if (opts.x_points < 1)
    throw ConfigError("the diagnostic needs at least one covariate point");
  if (!(opts.bandwidth_scale > 0.0))
    throw ConfigError("diagnostic bandwidth scale must be positive");
  Bandwidths bw = resolve_bandwidths(samples, kernel);
  for (double& b : bw.x)
    b *= opts.bandwidth_scale;
  const ConditionalCdfEstimator est(samples, bw, kernel.min_effective, kernel.density_floor);
  const auto [lo, hi] = trimmed_range(samples, opts.trim_lower, opts.trim_upper);
  const std::vector<double> ys = uniform_grid(lo, hi, opts.y_points);

  // interior points of the weight box along the chosen coordinate, the
  // other coordinates at the box centre
  const Box& box = weight.support();
  std::vector<std::vector<double>> xs;
  for (std::size_t k = 0; k < opts.x_points; ++k) {
    std::vector<double> x(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d)
      x[d] = 0.5 * (box.lower[d] + box.upper[d]);
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(opts.x_points);
    const std::size_t i = weight.index();
    x[i] = box.lower[i] + t * (box.upper[i] - box.lower[i]);
    xs.push_back(std::move(x));
  }
  return homoscedasticity_diagnostic(sample_lambda_tilde_grid(est, weight.index(), ys, xs),
                                     opts.noise_multiplier);
}

PluginResult plugin_transform(const LambdaFn& lambda, double y0, double B,
                              const ConstraintSet& constraints, std::span<const double> grid,
                              const PluginOptions& opts)
{
  PluginResult out;
  const Identification id{ y0, 0.0, B };
  out.transform = reconstruct_constrained(lambda, id, constraints, grid, opts.reconstruction);
  out.repair_rate =
    static_cast<double>(out.transform.repaired_points) / static_cast<double>(grid.size());
  if (out.repair_rate > opts.repair_warning_rate) {
    std::ostringstream msg;
    msg << "monotonicity repair changed " << out.transform.repaired_points << " of "
        << grid.size() << " grid points";
    out.warnings.push_back(msg.str());
  }
  return out;
}

PluginResult plugin_reconstruct(const SampleSet& samples, const KernelConfig& kernel,
                                const WeightFunction& weight, const ConstraintSet& constraints,
                                std::span<const double> grid, const PluginOptions& opts)
{
  LambdaEstimate lambda = estimate_lambda(samples, kernel, weight, opts.lambda);
  if (grid.empty() || grid.front() < lambda.grid.front() || grid.back() > lambda.grid.back()) {
    std::ostringstream msg;
    msg << "reconstruction grid exceeds the tabulated lambda-hat range [" << lambda.grid.front()
        << ", " << lambda.grid.back() << "]";
    throw DomainError(msg.str());
  }
  PluginResult out = plugin_transform(lambda.function(), lambda.y0, lambda.B, constraints, grid, opts);
  if (lambda.sign_violations > 0) {
    std::ostringstream msg;
    msg << "lambda-hat has the wrong sign at " << lambda.sign_violations
        << " tabulated points outside the slope window";
    out.warnings.push_back(msg.str());
  }
  out.lambda = std::move(lambda);
  return out;
}

std::string lambda_estimate_to_csv(const LambdaEstimate& estimate)
{
  return lambda_to_csv(estimate.grid, estimate.values);
}

} // namespace trafoid
