#pragma once

#include <functional>
#include <string>

namespace trafoid {

using ScalarFn = std::function<double(double)>;

/*
 * Law of the model error. Only laws with a continuous, everywhere positive
 * density are supported; `validate` checks the centring and unit variance
 * numerically.
 */
class ErrorDistribution
{
public:
  ErrorDistribution(std::string name, ScalarFn pdf, ScalarFn cdf, ScalarFn quantile);

  static ErrorDistribution standard_normal();
  //! Logistic law rescaled to mean 0 and variance 1.
  static ErrorDistribution standard_logistic();
  static ErrorDistribution by_name(const std::string& name);

  double pdf(double z) const { return pdf_(z); }
  double cdf(double z) const { return cdf_(z); }
  //! Throws DomainError outside (0, 1).
  double quantile(double p) const;
  const std::string& name() const { return name_; }

  struct Moments
  {
    double mass;
    double mean;
    double variance;
  };
  Moments moments() const;

  //! Throws DomainError unless mass = 1, mean = 0 and variance = 1 within tol.
  void validate(double tol = 1e-8) const;

private:
  std::string name_;
  ScalarFn pdf_;
  ScalarFn cdf_;
  ScalarFn quantile_;
};

} // namespace trafoid
