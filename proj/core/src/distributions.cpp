#include "trafoid/distributions.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "trafoid/error.hpp"
#include "trafoid/numerics/quadrature.hpp"

namespace trafoid {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kSqrt2 = 1.41421356237309504880168872421;
constexpr double kPi = 3.14159265358979323846;

} // namespace

ErrorDistribution::ErrorDistribution(std::string name, ScalarFn pdf, ScalarFn cdf,
                                     ScalarFn quantile)
  : name_(std::move(name))
  , pdf_(std::move(pdf))
  , cdf_(std::move(cdf))
  , quantile_(std::move(quantile))
{
  if (!pdf_ || !cdf_ || !quantile_)
    throw DomainError("error distribution '" + name_ + "' needs pdf, cdf and quantile");
}

ErrorDistribution ErrorDistribution::standard_normal()
{
  return ErrorDistribution(
    "normal",
    [](double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); },
    [](double z) { return 0.5 * std::erfc(-z / kSqrt2); },
    [](double p) { return -kSqrt2 * boost::math::erfc_inv(2.0 * p); });
}

ErrorDistribution ErrorDistribution::standard_logistic()
{
  // logistic with scale s has variance s^2 pi^2 / 3
  const double s = std::sqrt(3.0) / kPi;
  return ErrorDistribution(
    "logistic",
    [s](double z) {
      const double e = std::exp(-std::abs(z) / s);
      return e / (s * (1.0 + e) * (1.0 + e));
    },
    [s](double z) {
      if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z / s));
      const double e = std::exp(z / s);
      return e / (1.0 + e);
    },
    [s](double p) { return s * std::log(p / (1.0 - p)); });
}

ErrorDistribution ErrorDistribution::by_name(const std::string& name)
{
  if (name == "normal")
    return standard_normal();
  if (name == "logistic")
    return standard_logistic();
  throw DomainError("unknown error distribution '" + name + "' (expected normal or logistic)");
}

double ErrorDistribution::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "quantile level " << p << " outside (0, 1)";
    throw DomainError(msg.str());
  }
  return quantile_(p);
}

ErrorDistribution::Moments ErrorDistribution::moments() const
{
  numerics::QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-13;
  // the supported laws are negligible beyond |z| = 60
  const double cuts[] = { -60.0, -10.0, 0.0, 10.0, 60.0 };
  Moments m{ 0.0, 0.0, 0.0 };
  for (int k = 0; k < 4; ++k) {
    m.mass += numerics::integrate([&](double z) { return pdf_(z); }, cuts[k], cuts[k + 1], opts).value;
    m.mean += numerics::integrate([&](double z) { return z * pdf_(z); }, cuts[k], cuts[k + 1], opts).value;
  }
  for (int k = 0; k < 4; ++k)
    m.variance += numerics::integrate([&](double z) { return (z - m.mean) * (z - m.mean) * pdf_(z); },
                                      cuts[k], cuts[k + 1], opts)
                    .value;
  return m;
}

void ErrorDistribution::validate(double tol) const
{
  const Moments m = moments();
  if (std::abs(m.mass - 1.0) > tol || std::abs(m.mean) > tol || std::abs(m.variance - 1.0) > tol) {
    std::ostringstream msg;
    msg << "error distribution '" << name_ << "' is not standardised: mass " << m.mass << ", mean "
        << m.mean << ", variance " << m.variance << " (need 1, 0, 1)";
    throw DomainError(msg.str());
  }
}

} // namespace trafoid
