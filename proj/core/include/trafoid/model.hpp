#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "trafoid/distributions.hpp"

namespace trafoid {

using FieldFn = std::function<double(std::span<const double>)>;
//! Partial derivative with respect to the 0-based coordinate index.
using PartialFn = std::function<double(std::span<const double>, std::size_t)>;

//! Strictly increasing, continuously differentiable response transformation.
struct Transformation
{
  std::string name;
  ScalarFn value;
  ScalarFn derivative;
  //! Optional closed-form inverse; bracketed bisection is used otherwise.
  ScalarFn inverse;
};

//! Covariate function (regression or scale) with its gradient.
struct CovariateMap
{
  std::string name;
  FieldFn value;
  PartialFn partial;
};

/*
 * The location-scale transformation model h(Y) = g(X) + sigma(X) * eps.
 * Immutable after construction; safe to share across threads.
 */
class TransformationModel
{
public:
  TransformationModel(std::string name, std::size_t dim, Transformation h, CovariateMap g,
                      CovariateMap sigma, ErrorDistribution error);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }

  double h(double y) const { return h_.value(y); }
  double dh(double y) const { return h_.derivative(y); }
  //! Inverse transformation; throws NumericalError when the numeric
  //! inversion cannot bracket z.
  double h_inverse(double z) const;

  double g(std::span<const double> x) const { return g_.value(x); }
  double dg(std::span<const double> x, std::size_t i) const { return g_.partial(x, i); }
  double sigma(std::span<const double> x) const { return sigma_.value(x); }
  double dsigma(std::span<const double> x, std::size_t i) const { return sigma_.partial(x, i); }

  const ErrorDistribution& error() const { return error_; }
  const Transformation& transformation() const { return h_; }
  const CovariateMap& regression() const { return g_; }
  const CovariateMap& scale() const { return sigma_; }

private:
  std::string name_;
  std::size_t dim_;
  Transformation h_;
  CovariateMap g_;
  CovariateMap sigma_;
  ErrorDistribution error_;
};

// Parametric building blocks used by the registry and the model config.
Transformation identity_transform();
Transformation sinh_transform(double scale = 1.0);
//! y + c * y^3, c >= 0.
Transformation cubic_transform(double c);
Transformation affine_transform(double a, double b);
CovariateMap linear_map(double intercept, std::vector<double> coef);
//! scale * exp(coef . x)
CovariateMap exp_linear_map(double scale, std::vector<double> coef);
CovariateMap constant_map(double value, std::size_t dim);

//! The observationally equivalent model (a h + b, a g + b, a sigma), a > 0.
TransformationModel affine_equivalent(const TransformationModel& model, double a, double b);

/*
 * Registered fixtures:
 *   M1    h = id,   g = x, sigma = e^x,  normal errors
 *   M2    M1 with sigma = 1 (homoscedastic)
 *   M3    h = sinh, g = x, sigma = e^x,  normal errors
 *   M1neg M1 with sigma = e^-x (B = -1)
 *   M4    h = id, g = x1 + x2/2, sigma = exp(x1/2 + x2/4), d = 2
 *   M1L   M1 with logistic errors
 */
TransformationModel registered_model(const std::string& name);
std::vector<std::string> registered_model_names();

//! Structured description: component identifiers plus numeric parameters.
struct ModelSpec
{
  std::string preset;
  std::string h = "identity";
  double h_param = 1.0;
  double h_offset = 0.0;
  std::string g = "linear";
  double g_intercept = 0.0;
  std::vector<double> g_coef{ 1.0 };
  std::string sigma = "exp_linear";
  double sigma_scale = 1.0;
  std::vector<double> sigma_coef{ 1.0 };
  std::string error = "normal";
};

TransformationModel build_model(const ModelSpec& spec);

struct Box
{
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
  double volume() const;
};

/*
 * Nonnegative weight v on an axis-aligned box. The density defaults to the
 * constant 1 on the support. `index` selects the covariate (0-based) whose
 * partial derivative enters lambda-tilde.
 */
class WeightFunction
{
public:
  explicit WeightFunction(Box support, std::size_t index = 0, FieldFn density = {});

  double operator()(std::span<const double> x) const;
  const Box& support() const { return support_; }
  std::size_t index() const { return index_; }
  bool is_constant() const { return !density_; }

private:
  Box support_;
  std::size_t index_;
  FieldFn density_;
};

WeightFunction unit_weight(std::size_t dim, std::size_t index = 0);

// Conditional distribution of Y given X = x implied by the model.
double cond_cdf(const TransformationModel& model, double y, std::span<const double> x);
double cond_cdf_dy(const TransformationModel& model, double y, std::span<const double> x);
//! Partial derivative in the 0-based covariate i.
double cond_cdf_dxi(const TransformationModel& model, double y, std::span<const double> x,
                    std::size_t i);

} // namespace trafoid
