#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trafoid/lambda.hpp"
#include "trafoid/reconstruction.hpp"

namespace trafoid {

using RhsFn = std::function<double(double, double)>;

//! h'(y) = D(y, h(y)) on [a, b] with h(a) = theta0 > 0.
struct IvpSpec
{
  RhsFn rhs;
  double a = 0.0;
  double b = 1.0;
  double theta0 = 1.0;
};

//! Checks a < b, theta0 > 0 and finiteness of D on a sample of the strip.
void validate(const IvpSpec& spec);

struct IvpSolution
{
  std::vector<double> grid;
  std::vector<double> values;
};

/*
 * Classical fourth-order Runge-Kutta with N uniform steps. Throws
 * DomainError when the trajectory leaves the positive reals and
 * NumericalError on non-finite stages.
 */
IvpSolution integrate_ivp(const IvpSpec& spec, std::size_t steps);

struct UniquenessReport
{
  std::size_t steps = 0;
  double step_doubling = 0.0;   //!< max |h_N - h_2N| on the common nodes
  double midpoint_restart = 0.0; //!< max |h_N - restarted h_N| on [mid, b]
  double max_deviation = 0.0;
  double threshold = 1e-6;
  bool consistent = false;
};

/*
 * Integrates at N and 2N steps and again from a restart at the midpoint
 * with the attained value; compares all three trajectories.
 */
UniquenessReport uniqueness_probe(const IvpSpec& spec, std::size_t steps = 1000,
                                  double threshold = 1e-6);

/*
 * IVP h' = -(A + B h) / lambda(y) on [a, b] with h(a) = theta0. Throws
 * DomainError when [a, b] contains y0.
 */
IvpSpec reconstruction_ivp(const LambdaFn& lambda, const Identification& id, double a, double b,
                           double theta0);

struct CrossCheckReport
{
  double a = 0.0;
  double b = 0.0;
  std::size_t steps = 0;
  double sup_deviation = 0.0;
  UniquenessReport uniqueness;
};

/*
 * Compares the closed-form upper branch with direct integration of the
 * ODE on [a, b], y0 < a < b. Both use the normalised form A = 0,
 * h(b) = 1, which keeps the solution positive above y0.
 */
CrossCheckReport closed_form_crosscheck(const LambdaFn& lambda, double y0, double B, double a,
                                        double b, std::size_t steps = 2000,
                                        double uniqueness_threshold = 1e-6);

enum class GronwallVerdict
{
  holds,
  hypothesis_fails,
  conclusion_violated
};

std::string to_string(GronwallVerdict v);

//! u <= v + int_a^y q u implies u <= v + int_a^y v q exp(int_z^y q).
struct GronwallInstance
{
  double a = 0.0;
  double b = 1.0;
  ScalarFn u;
  ScalarFn v;
  ScalarFn q;
};

struct GronwallResult
{
  GronwallVerdict verdict = GronwallVerdict::holds;
  double hypothesis_excess = 0.0;  //!< max of u - (v + int q u)
  double conclusion_excess = 0.0;  //!< max of u - bound
};

/*
 * Pointwise check on a uniform grid with trapezoidal integrals. Both
 * inequalities are tested with an additive slack. Throws DomainError for
 * resolution < 64, a negative q sample or non-finite values.
 */
GronwallResult gronwall_check(const GronwallInstance& instance, std::size_t resolution = 256,
                              double slack = 1e-9);

/*
 * Random instance: v a cubic and q the absolute value of a cubic with
 * coefficients uniform in [-1, 1] on [0, b], b uniform in [0.5, 2]; u
 * solves the discrete equation u = v - s + int q u with s in [0.01, 0.11].
 */
GronwallInstance random_gronwall_instance(std::uint64_t seed, std::size_t resolution);

struct GronwallSuiteReport
{
  std::size_t instances = 0;
  std::size_t holds = 0;
  std::size_t hypothesis_fails = 0;
  std::size_t conclusion_violated = 0;
  double max_conclusion_excess = -1e300;
  std::vector<std::uint64_t> failing_seeds;
};

GronwallSuiteReport run_gronwall_suite(std::size_t instances, std::size_t resolution,
                                       std::uint64_t seed, double slack = 1e-9);

struct VerificationReport
{
  std::string model;
  GronwallSuiteReport gronwall;
  CrossCheckReport crosscheck;
  double crosscheck_tol = 1e-6;

  bool passed() const;
  std::string to_text() const;
};

} // namespace trafoid
