#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "trafoid/lambda.hpp"
#include "trafoid/model.hpp"
#include "trafoid/numerics/quadrature.hpp"
#include "trafoid/samples.hpp"

namespace trafoid {

//! h(y0) = -A/B and h(y1) = alpha, with y1 > y0 and alpha > -A/B.
struct Canonical
{
  double y1;
  double alpha;
};

//! h(ya) = alpha_a and h(yb) = alpha_b, ya < yb, alpha_a < alpha_b.
struct TwoPoint
{
  double ya;
  double yb;
  double alpha_a;
  double alpha_b;
};

//! h(ya) = alpha_a and h'(ya) = slope > 0.
struct PointSlope
{
  double ya;
  double alpha_a;
  double slope;
};

using ConstraintSet = std::variant<Canonical, TwoPoint, PointSlope>;

//! Throws DomainError on violated ordering / positivity requirements that
//! do not depend on the identified quantities.
void validate(const ConstraintSet& constraints);
std::string describe(const ConstraintSet& constraints);

//! The identified scalars: root of lambda and the A/B coefficients.
struct Identification
{
  double y0;
  double A;
  double B;
};

struct Alpha2Options
{
  double t0_fraction = 0.1; //!< t0 = fraction * min(y1 - y0, y0 - y2)
  int halvings = 12;
  double rel_tol = 1e-8;
};

struct Alpha2Result
{
  double value = 0.0;
  int halvings_used = 0;
  double last_relative_change = 0.0;
  std::vector<double> extrapolants;
};

struct ReconstructionOptions
{
  //! Half-width of the excised band around y0, as a fraction of the grid range.
  double excision_fraction = 1e-3;
  //! Lower anchor; defaults to the mirror image of y1 about y0.
  std::optional<double> y2;
  numerics::QuadratureOptions quadrature{ 1e-13, 1e-13, 4000 };
  Alpha2Options alpha2;
  double residual_tol = 1e-5;
  //! Throw on a non-increasing output, or repair it by isotonic regression.
  bool repair_monotonicity = false;
};

/*
 * h on a grid, with ODE residuals |h'_num lambda + A + B h| and the
 * one-sided derivative estimates at y0.
 */
struct ReconstructedTransform
{
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> derivatives;
  std::vector<double> lambda_values;
  std::vector<double> residuals;
  std::vector<char> interpolated;

  double y0 = 0.0;
  double A = 0.0;
  double B = 0.0;
  double y1 = 0.0;
  double alpha = 0.0;
  double y2 = 0.0;
  double alpha2 = 0.0;
  double excision = 0.0;
  Alpha2Result alpha2_info;
  double left_slope = 0.0;
  double right_slope = 0.0;
  std::size_t repaired_points = 0;

  //! Maximum residual over points outside the excision band.
  double max_residual() const;
  //! Maximum of residual / (1 + |h|) over points outside the band.
  double max_scaled_residual() const;
  //! Cubic Hermite interpolation of the tabulated values (exact at knots).
  double value_at(double y) const;
  double derivative_at(double y) const;
};

/*
 * Closed-form solution on one side of y0 anchored at (anchor, anchor_value):
 *   h(y) = ((A + B a) exp(-B int_anchor^y 1/lambda) - A) / B.
 * Points must lie on the anchor's side of y0 and outside the excision band.
 */
std::vector<double> reconstruct_branch(const LambdaFn& lambda, const Identification& id,
                                       double anchor, double anchor_value,
                                       std::span<const double> points, double excision,
                                       const numerics::QuadratureOptions& opts = {});

//! Upper branch (y > y0) anchored at h(y1) = alpha.
std::vector<double> reconstruct_upper(const LambdaFn& lambda, const Identification& id, double y1,
                                      double alpha, std::span<const double> points,
                                      double excision,
                                      const numerics::QuadratureOptions& opts = {});

/*
 * Lower-branch scale alpha2 fixed by matching h' on both sides of y0:
 *   alpha2 = -(lim_{t->0} (A + B alpha) exp(B (I2(t) - I1(t))) + A) / B,
 * I2(t) = int_{y2}^{y0-t} 1/lambda, I1(t) = int_{y1}^{y0+t} 1/lambda. The
 * limit is taken on t_k = t0 2^-k with two Richardson levels. Throws
 * NumericalError when the extrapolants do not settle.
 */
Alpha2Result alpha2_limit(const LambdaFn& lambda, const Identification& id, double y1, double y2,
                          double alpha, const Alpha2Options& opts = {},
                          const numerics::QuadratureOptions& quad = {});

ReconstructedTransform reconstruct_global(const LambdaFn& lambda, const Identification& id,
                                          const Canonical& constraints,
                                          std::span<const double> grid,
                                          const ReconstructionOptions& opts = {});

/*
 * Reconstruction under any constraint set. Two-point and point-plus-slope
 * constraints are turned into the equivalent canonical pair (location
 * -A'/B, scale alpha') using point evaluations of the normalised closed
 * form, then solved directly.
 */
ReconstructedTransform reconstruct_constrained(const LambdaFn& lambda, const Identification& id,
                                               const ConstraintSet& constraints,
                                               std::span<const double> grid,
                                               const ReconstructionOptions& opts = {});

//! Affine remap of a reconstruction onto other constraints.
std::vector<double> remap_constraints(const ReconstructedTransform& transform,
                                      const ConstraintSet& target);

/*
 * |h'_num(y) lambda(y) + A + B h(y)| with h'_num from five-point
 * finite-difference stencils over the usable (mask != 0) neighbours.
 * Points with mask == 0 get NaN.
 */
std::vector<double> ode_residuals(std::span<const double> grid, std::span<const double> values,
                                  std::span<const double> lambda_values, double A, double B,
                                  std::span<const char> usable);

//! Point evaluation of the global closed-form solution.
class ClosedFormTransform
{
public:
  ClosedFormTransform(LambdaFn lambda, Identification id, double y1, double alpha, double y2,
                      double alpha2, numerics::QuadratureOptions opts = { 1e-13, 1e-13, 4000 });

  double operator()(double y) const;
  double derivative(double y) const;

private:
  LambdaFn lambda_;
  Identification id_;
  double y1_;
  double alpha_;
  double y2_;
  double alpha2_;
  numerics::QuadratureOptions opts_;
};

struct GSigma
{
  double g;
  double sigma;
};

//! Conditional mean and standard deviation of h_hat(Y) given X = x under
//! the model, by quadrature against the error law.
GSigma recover_g_sigma_oracle(const ScalarFn& h_hat, const TransformationModel& model,
                              std::span<const double> x);

/*
 * Nadaraya-Watson (Gaussian product kernel) estimates of the conditional
 * mean and standard deviation of h_hat(Y_i) given X = x. Throws ConfigError
 * when the kernel mass sum_j K((x - X_j)/b) is below min_effective.
 */
GSigma recover_g_sigma_samples(const ScalarFn& h_hat, const SampleSet& samples,
                               std::span<const double> bandwidth, std::span<const double> x,
                               double min_effective = 5.0);

//! CSV `y,h,residual,interpolated_flag`.
std::string reconstruction_to_csv(const ReconstructedTransform& transform);
Metadata reconstruction_metadata(const ReconstructedTransform& transform,
                                 const ConstraintSet& constraints,
                                 const ReconstructionOptions& opts);

} // namespace trafoid
