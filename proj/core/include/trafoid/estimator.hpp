#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trafoid/lambda.hpp"
#include "trafoid/numerics/interpolation.hpp"
#include "trafoid/reconstruction.hpp"
#include "trafoid/samples.hpp"

namespace trafoid {

/*
 * Gaussian-kernel smoothing configuration. Unset bandwidths follow the
 * rule of thumb b = c * s * n^(-1/(4 + d)) with s the sample standard
 * deviation of the coordinate.
 */
struct KernelConfig
{
  double cx = 1.0;
  double cy = 1.0;
  std::vector<double> bandwidth_x;
  std::optional<double> bandwidth_y;
  //! Floor on the local kernel mass sum_j K((x - X_j) / b).
  double min_effective = 5.0;
  //! Floor on the estimated conditional density.
  double density_floor = 1e-10;
};

struct Bandwidths
{
  std::vector<double> x;
  double y = 0.0;
};

double rule_of_thumb(std::span<const double> values, double c, std::size_t dim);
Bandwidths resolve_bandwidths(const SampleSet& samples, const KernelConfig& config);

//! Kernel weights of the samples at a fixed covariate point.
struct LocalWeights
{
  std::vector<std::size_t> index;
  std::vector<double> w;  //!< K_j / sum K
  std::vector<double> c;  //!< d w_j / d x_i
  double mass = 0.0;      //!< sum_j K_j
};

struct PartialEstimate
{
  double cdf = 0.0;
  double dF_dy = 0.0;
  double dF_dxi = 0.0;
  double lambda_tilde = 0.0;
  //! Delta-method standard error of lambda_tilde.
  double lambda_tilde_se = 0.0;
};

/*
 * Smoothed Nadaraya-Watson estimate of F(y | x) = sum_j w_j(x) Phi((y - Y_j) / b_y)
 * with analytic derivatives in y and in one covariate.
 */
class ConditionalCdfEstimator
{
public:
  ConditionalCdfEstimator(const SampleSet& samples, Bandwidths bandwidths,
                          double min_effective = 5.0, double density_floor = 1e-10);
  ConditionalCdfEstimator(const SampleSet& samples, const KernelConfig& config);

  const Bandwidths& bandwidths() const { return bw_; }

  //! Throws ConfigError when the kernel mass at x is below the floor.
  LocalWeights local_weights(std::span<const double> x, std::size_t index) const;

  double cdf(double y, std::span<const double> x) const;
  //! Throws IdentificationError when dF/dy is below the density floor.
  PartialEstimate partials(double y, std::span<const double> x, std::size_t index) const;
  PartialEstimate evaluate(const LocalWeights& weights, double y) const;

private:
  SampleSet samples_;
  Bandwidths bw_;
  double min_effective_;
  double density_floor_;
};

struct LambdaEstimateOptions
{
  std::size_t grid_points = 121;
  double trim_lower = 0.05;
  double trim_upper = 0.95;
  //! Half-width of the linear window around y0 and the B differencing
  //! half-step, in grid spacings.
  double slope_window = 5.0;
  double b_floor = 1e-8;
  std::size_t min_samples = 50;
};

/*
 * lambda-hat tabulated on the trimmed y range, interpolated by a natural
 * cubic spline and replaced by its tangent line -B (y - y0) within the
 * slope window, where the ratio estimate is dominated by noise.
 */
struct LambdaEstimate
{
  std::vector<double> grid;
  std::vector<double> values;
  numerics::CubicSpline spline;
  double y0 = 0.0;
  double B = 0.0;
  double window = 0.0;
  std::size_t crossings = 0;
  //! Grid points outside the window where lambda-hat has the wrong sign.
  std::size_t sign_violations = 0;
  Bandwidths bandwidths;

  double operator()(double y) const;
  LambdaFn function() const;
};

LambdaEstimate estimate_lambda(const SampleSet& samples, const KernelConfig& kernel,
                               const WeightFunction& weight,
                               const LambdaEstimateOptions& opts = {});

//! lambda-hat integrated over the weight box at one y (GL3 panels of width <= b_x).
double estimated_lambda_at(const ConditionalCdfEstimator& estimator, const WeightFunction& weight,
                           double y);

/*
 * Estimated lambda-tilde on a product grid with delta-method standard
 * errors as the noise level, for the homoscedasticity diagnostic.
 */
LambdaTildeGrid sample_lambda_tilde_grid(const ConditionalCdfEstimator& estimator,
                                         std::size_t index, std::span<const double> ys,
                                         const std::vector<std::vector<double>>& xs);

struct SampleDiagnosticOptions
{
  std::size_t y_points = 25;
  std::size_t x_points = 5;
  double trim_lower = 0.05;
  double trim_upper = 0.95;
  double noise_multiplier = 3.0;
  //! Multiplies the covariate bandwidths; sign tests need less variance
  //! than the lambda-hat integral.
  double bandwidth_scale = 3.0;
};

//! Diagnostic on an interior grid of the weight box and the trimmed y range.
HeteroscedasticityVerdict sample_homoscedasticity_diagnostic(
  const SampleSet& samples, const KernelConfig& kernel, const WeightFunction& weight,
  const SampleDiagnosticOptions& opts = {});

struct PluginOptions
{
  LambdaEstimateOptions lambda;
  ReconstructionOptions reconstruction{ 1e-3, std::nullopt, { 1e-10, 1e-10, 2000 }, {}, 1e-5, true };
  double repair_warning_rate = 0.2;
};

struct PluginResult
{
  LambdaEstimate lambda;
  ReconstructedTransform transform;
  double repair_rate = 0.0;
  std::vector<std::string> warnings;
};

/*
 * lambda-hat fed to the reconstruction with A = 0, B-hat and y0-hat.
 * Canonical constraints place h(y0-hat) = 0. The grid must lie inside the
 * tabulated lambda-hat range.
 */
PluginResult plugin_reconstruct(const SampleSet& samples, const KernelConfig& kernel,
                                const WeightFunction& weight, const ConstraintSet& constraints,
                                std::span<const double> grid, const PluginOptions& opts = {});

/*
 * The reconstruction step of the plug-in pipeline for any lambda and
 * identified (y0, B), with A = 0. Feeding the oracle lambda reproduces the
 * analytic reconstruction. The `lambda` member of the result is left empty.
 */
PluginResult plugin_transform(const LambdaFn& lambda, double y0, double B,
                              const ConstraintSet& constraints, std::span<const double> grid,
                              const PluginOptions& opts = {});

std::string lambda_estimate_to_csv(const LambdaEstimate& estimate);

} // namespace trafoid
