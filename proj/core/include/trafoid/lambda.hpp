#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trafoid/io.hpp"
#include "trafoid/model.hpp"
#include "trafoid/numerics/differences.hpp"
#include "trafoid/numerics/quadrature.hpp"
#include "trafoid/numerics/roots.hpp"

namespace trafoid {

//! lambda-tilde(y | x) as a function of (y, x).
using LambdaTildeFn = std::function<double(double, std::span<const double>)>;
//! Weighted average lambda(y).
using LambdaFn = std::function<double(double)>;

/*
 * Ratio of the covariate partial to the y partial of the conditional CDF.
 * Throws IdentificationError when dF_dy <= floor (degenerate density).
 */
double lambda_tilde(double dF_dxi, double dF_dy, double floor = 1e-300);

//! lambda-tilde from the model components, with the error density cancelled.
LambdaTildeFn oracle_lambda_tilde(const TransformationModel& model, std::size_t index);

/*
 * Integral of v(x) * lambda_tilde(y | x) over supp(v). Nested adaptive
 * quadrature for d <= 3, Monte Carlo beyond. Throws NumericalError when
 * the adaptive rule does not reach the tolerance.
 */
numerics::QuadratureResult integrate_lambda(const LambdaTildeFn& lambda_tilde,
                                            const WeightFunction& weight, double y,
                                            const numerics::QuadratureOptions& opts = {});

struct CoefficientPair
{
  double A = 0.0;
  double B = 0.0;
};

//! A and B by quadrature; no check on B.
CoefficientPair compute_coefficients(const TransformationModel& model, const WeightFunction& weight,
                                     const numerics::QuadratureOptions& opts = {});

//! As compute_coefficients, but |B| < b_floor raises IdentificationError.
CoefficientPair coefficients_AB(const TransformationModel& model, const WeightFunction& weight,
                                const numerics::QuadratureOptions& opts = {},
                                double b_floor = 1e-8);

struct Crossing
{
  std::size_t index;  //!< sign change between grid[index] and grid[index + 1]
  double location;    //!< linear interpolation of the zero
};

/*
 * Picks the sign change of tabulated lambda values: the unique one when
 * there is one, otherwise the crossing closest to the median crossing
 * location. Throws IdentificationError without a sign change.
 */
Crossing select_crossing(std::span<const double> grid, std::span<const double> values);

/*
 * Root y0 of lambda in [lo, hi]. The interval is scanned on `scan_points`
 * nodes; the bracket chosen by select_crossing is refined by bisection
 * with secant acceleration.
 */
double find_y0(const LambdaFn& lambda, double lo, double hi, std::size_t scan_points = 401,
               const numerics::RootOptions& opts = {});

/*
 * B = -lambda'(y0). Follows from lambda = -(A + B h) / h' and
 * A + B h(y0) = 0: the h'' term of lambda' vanishes at the root.
 */
numerics::DerivativeEstimate recover_B(const LambdaFn& lambda, double y0, double step = 0.1);

enum class HeteroscedasticityVerdict
{
  homoscedastic_consistent,
  heteroscedastic,
  inconclusive
};

std::string to_string(HeteroscedasticityVerdict v);

//! lambda-tilde on a product grid: values[j][k] at (y[k], x_points[j]),
//! with a per-point noise level (standard error or quadrature error).
struct LambdaTildeGrid
{
  std::vector<double> y;
  std::vector<std::vector<double>> x_points;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> noise;
};

/*
 * Sign-change criterion: for a fixed x, lambda-tilde(. | x) keeps its sign
 * when sigma is constant and changes sign when d sigma / d x_i != 0 there.
 * A value counts only when |lambda-tilde| exceeds noise_multiplier times its
 * noise level.
 */
HeteroscedasticityVerdict homoscedasticity_diagnostic(const LambdaTildeGrid& grid,
                                                      double noise_multiplier = 3.0);

LambdaTildeGrid oracle_lambda_tilde_grid(const TransformationModel& model, std::size_t index,
                                         std::span<const double> ys,
                                         const std::vector<std::vector<double>>& xs,
                                         double noise = 1e-12);

/*
 * lambda as a queryable function plus its root and evaluation grid.
 * Immutable once built.
 */
struct LambdaField
{
  LambdaTildeFn lambda_tilde;
  LambdaFn lambda;
  double y0 = 0.0;
  std::vector<double> grid;
  double quadrature_tol = 1e-12;

  std::vector<double> tabulate() const;
};

struct OracleFieldOptions
{
  double search_lower = -10.0;
  double search_upper = 10.0;
  double grid_half_width = 1.5;
  std::size_t grid_points = 401;
  numerics::QuadratureOptions quadrature{ 1e-12, 1e-12, 4000 };
};

LambdaField oracle_lambda_field(const TransformationModel& model, const WeightFunction& weight,
                                const OracleFieldOptions& opts = {});

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);
//! Uniform grid symmetric about `center`; hits it exactly for odd `points`.
std::vector<double> centered_grid(double center, double half_width, std::size_t points);

//! CSV `y,lambda`.
std::string lambda_to_csv(std::span<const double> grid, std::span<const double> values);

} // namespace trafoid
