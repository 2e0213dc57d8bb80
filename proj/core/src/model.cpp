#include "trafoid/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trafoid/error.hpp"
#include "trafoid/numerics/roots.hpp"

namespace trafoid {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += a[k] * b[k];
  return s;
}

void check_sigma(double s, std::span<const double> x)
{
  if (!(s > 0.0)) {
    std::ostringstream msg;
    msg << "sigma(x) = " << s << " is not positive at x = (";
    for (std::size_t k = 0; k < x.size(); ++k)
      msg << (k ? ", " : "") << x[k];
    msg << ")";
    throw DomainError(msg.str());
  }
}

} // namespace

TransformationModel::TransformationModel(std::string name, std::size_t dim, Transformation h,
                                         CovariateMap g, CovariateMap sigma,
                                         ErrorDistribution error)
  : name_(std::move(name))
  , dim_(dim)
  , h_(std::move(h))
  , g_(std::move(g))
  , sigma_(std::move(sigma))
  , error_(std::move(error))
{
  if (dim_ == 0)
    throw DomainError("covariate dimension must be positive");
  if (!h_.value || !h_.derivative)
    throw DomainError("transformation needs value and derivative");
  if (!g_.value || !g_.partial || !sigma_.value || !sigma_.partial)
    throw DomainError("regression and scale functions need values and gradients");
  error_.validate();
}

double TransformationModel::h_inverse(double z) const
{
  if (h_.inverse)
    return h_.inverse(z);
  // h is strictly increasing: grow a bracket geometrically, bisect, then
  // polish with one Newton step.
  double lo = -1.0;
  double hi = 1.0;
  int grow = 0;
  while (h_.value(lo) > z && grow < 200) {
    lo *= 2.0;
    ++grow;
  }
  while (h_.value(hi) < z && grow < 400) {
    hi *= 2.0;
    ++grow;
  }
  if (!(h_.value(lo) <= z && h_.value(hi) >= z)) {
    std::ostringstream msg;
    msg << "cannot invert transformation '" << h_.name << "' at " << z;
    throw NumericalError(msg.str());
  }
  numerics::RootOptions opts;
  opts.x_tol = 1e-15;
  double y = numerics::find_root([&](double t) { return h_.value(t) - z; }, lo, hi, opts).root;
  const double d = h_.derivative(y);
  if (d > 0.0 && std::isfinite(d))
    y -= (h_.value(y) - z) / d;
  return y;
}

Transformation identity_transform()
{
  return { "identity", [](double y) { return y; }, [](double) { return 1.0; },
           [](double z) { return z; } };
}

Transformation sinh_transform(double scale)
{
  if (!(scale > 0.0))
    throw DomainError("sinh transformation scale must be positive");
  if (scale == 1.0)
    return { "sinh", [](double y) { return std::sinh(y); }, [](double y) { return std::cosh(y); },
             [](double z) { return std::asinh(z); } };
  return { "sinh_scaled", [scale](double y) { return std::sinh(scale * y) / scale; },
           [scale](double y) { return std::cosh(scale * y); },
           [scale](double z) { return std::asinh(scale * z) / scale; } };
}

Transformation cubic_transform(double c)
{
  if (c < 0.0)
    throw DomainError("cubic transformation needs c >= 0 to stay strictly increasing");
  // no closed-form inverse registered: exercised through numeric inversion
  return { "cubic", [c](double y) { return y + c * y * y * y; },
           [c](double y) { return 1.0 + 3.0 * c * y * y; }, {} };
}

Transformation affine_transform(double a, double b)
{
  if (!(a > 0.0))
    throw DomainError("affine transformation slope must be positive");
  return { "affine", [a, b](double y) { return a * y + b; }, [a](double) { return a; },
           [a, b](double z) { return (z - b) / a; } };
}

CovariateMap linear_map(double intercept, std::vector<double> coef)
{
  return { "linear",
           [intercept, coef](std::span<const double> x) { return intercept + dot(coef, x); },
           [coef](std::span<const double>, std::size_t i) { return coef.at(i); } };
}

CovariateMap exp_linear_map(double scale, std::vector<double> coef)
{
  return { "exp_linear",
           [scale, coef](std::span<const double> x) { return scale * std::exp(dot(coef, x)); },
           [scale, coef](std::span<const double> x, std::size_t i) {
             return coef.at(i) * scale * std::exp(dot(coef, x));
           } };
}

CovariateMap constant_map(double value, std::size_t dim)
{
  return { "constant", [value](std::span<const double>) { return value; },
           [dim](std::span<const double>, std::size_t i) {
             if (i >= dim)
               throw DomainError("coordinate index out of range");
             return 0.0;
           } };
}

TransformationModel affine_equivalent(const TransformationModel& model, double a, double b)
{
  if (!(a > 0.0))
    throw DomainError("affine equivalence needs a > 0");
  const Transformation& base = model.transformation();
  Transformation h{ base.name + "_affine", [base, a, b](double y) { return a * base.value(y) + b; },
                    [base, a](double y) { return a * base.derivative(y); }, {} };
  if (base.inverse)
    h.inverse = [base, a, b](double z) { return base.inverse((z - b) / a); };
  const CovariateMap& g = model.regression();
  const CovariateMap& s = model.scale();
  CovariateMap g2{ g.name + "_affine", [g, a, b](std::span<const double> x) { return a * g.value(x) + b; },
                   [g, a](std::span<const double> x, std::size_t i) { return a * g.partial(x, i); } };
  CovariateMap s2{ s.name + "_affine", [s, a](std::span<const double> x) { return a * s.value(x); },
                   [s, a](std::span<const double> x, std::size_t i) { return a * s.partial(x, i); } };
  return TransformationModel(model.name() + "_affine", model.dim(), std::move(h), std::move(g2),
                             std::move(s2), model.error());
}

TransformationModel registered_model(const std::string& name)
{
  const auto normal = ErrorDistribution::standard_normal();
  if (name == "M1")
    return TransformationModel("M1", 1, identity_transform(), linear_map(0.0, { 1.0 }),
                               exp_linear_map(1.0, { 1.0 }), normal);
  if (name == "M2")
    return TransformationModel("M2", 1, identity_transform(), linear_map(0.0, { 1.0 }),
                               constant_map(1.0, 1), normal);
  if (name == "M3")
    return TransformationModel("M3", 1, sinh_transform(), linear_map(0.0, { 1.0 }),
                               exp_linear_map(1.0, { 1.0 }), normal);
  if (name == "M1neg")
    return TransformationModel("M1neg", 1, identity_transform(), linear_map(0.0, { 1.0 }),
                               exp_linear_map(1.0, { -1.0 }), normal);
  if (name == "M4")
    return TransformationModel("M4", 2, identity_transform(), linear_map(0.0, { 1.0, 0.5 }),
                               exp_linear_map(1.0, { 0.5, 0.25 }), normal);
  if (name == "M1L")
    return TransformationModel("M1L", 1, identity_transform(), linear_map(0.0, { 1.0 }),
                               exp_linear_map(1.0, { 1.0 }), ErrorDistribution::standard_logistic());
  throw DomainError("unknown registered model '" + name + "'");
}

std::vector<std::string> registered_model_names()
{
  return { "M1", "M2", "M3", "M1neg", "M4", "M1L" };
}

TransformationModel build_model(const ModelSpec& spec)
{
  if (!spec.preset.empty())
    return registered_model(spec.preset);

  Transformation h;
  if (spec.h == "identity")
    h = identity_transform();
  else if (spec.h == "sinh")
    h = sinh_transform(spec.h_param);
  else if (spec.h == "cubic")
    h = cubic_transform(spec.h_param);
  else if (spec.h == "affine")
    h = affine_transform(spec.h_param, spec.h_offset);
  else
    throw DomainError("unknown transformation '" + spec.h + "'");

  const std::size_t dim = spec.g_coef.size();
  if (spec.g != "linear")
    throw DomainError("unknown regression function '" + spec.g + "'");
  CovariateMap g = linear_map(spec.g_intercept, spec.g_coef);

  CovariateMap sigma;
  if (spec.sigma == "exp_linear") {
    if (spec.sigma_coef.size() != dim)
      throw DomainError("sigma coefficients must match the covariate dimension");
    sigma = exp_linear_map(spec.sigma_scale, spec.sigma_coef);
  } else if (spec.sigma == "constant") {
    sigma = constant_map(spec.sigma_scale, dim);
  } else {
    throw DomainError("unknown scale function '" + spec.sigma + "'");
  }
  if (!(spec.sigma_scale > 0.0))
    throw DomainError("sigma scale must be positive");
  return TransformationModel("custom", dim, std::move(h), std::move(g), std::move(sigma),
                             ErrorDistribution::by_name(spec.error));
}

bool Box::contains(std::span<const double> x) const
{
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (x[k] < lower[k] || x[k] > upper[k])
      return false;
  return true;
}

double Box::volume() const
{
  double v = 1.0;
  for (std::size_t k = 0; k < lower.size(); ++k)
    v *= upper[k] - lower[k];
  return v;
}

WeightFunction::WeightFunction(Box support, std::size_t index, FieldFn density)
  : support_(std::move(support))
  , index_(index)
  , density_(std::move(density))
{
  if (support_.lower.empty() || support_.lower.size() != support_.upper.size())
    throw DomainError("weight support needs matching lower and upper bounds");
  for (std::size_t k = 0; k < support_.dim(); ++k)
    if (!(support_.upper[k] > support_.lower[k]))
      throw DomainError("weight support must have positive volume");
  if (index_ >= support_.dim())
    throw DomainError("weight derivative index outside the covariate dimension");
}

double WeightFunction::operator()(std::span<const double> x) const
{
  if (!support_.contains(x))
    return 0.0;
  if (!density_)
    return 1.0;
  return std::max(0.0, density_(x));
}

WeightFunction unit_weight(std::size_t dim, std::size_t index)
{
  return WeightFunction(Box{ std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0) }, index);
}

double cond_cdf(const TransformationModel& model, double y, std::span<const double> x)
{
  const double s = model.sigma(x);
  check_sigma(s, x);
  return model.error().cdf((model.h(y) - model.g(x)) / s);
}

double cond_cdf_dy(const TransformationModel& model, double y, std::span<const double> x)
{
  const double s = model.sigma(x);
  check_sigma(s, x);
  return model.error().pdf((model.h(y) - model.g(x)) / s) * model.dh(y) / s;
}

double cond_cdf_dxi(const TransformationModel& model, double y, std::span<const double> x,
                    std::size_t i)
{
  if (i >= model.dim()) {
    std::ostringstream msg;
    msg << "coordinate index " << i + 1 << " outside 1.." << model.dim();
    throw DomainError(msg.str());
  }
  const double s = model.sigma(x);
  check_sigma(s, x);
  const double resid = model.h(y) - model.g(x);
  return -model.error().pdf(resid / s) * (s * model.dg(x, i) + resid * model.dsigma(x, i)) / (s * s);
}

} // namespace trafoid
