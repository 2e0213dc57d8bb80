#include "trafoid/ode_verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "trafoid/error.hpp"
#include "trafoid/numerics/interpolation.hpp"
#include "trafoid/samples.hpp"

namespace trafoid {

void validate(const IvpSpec& spec)
{
  if (!spec.rhs)
    throw DomainError("IVP right-hand side is empty");
  if (!(spec.a < spec.b))
    throw DomainError("IVP interval needs a < b");
  if (!(spec.theta0 > 0.0))
    throw DomainError("IVP initial value must be positive");
  for (int k = 0; k <= 8; ++k) {
    const double y = spec.a + (spec.b - spec.a) * k / 8.0;
    if (!std::isfinite(spec.rhs(y, spec.theta0))) {
      std::ostringstream msg;
      msg << "IVP right-hand side is not finite at (" << y << ", " << spec.theta0 << ")";
      throw DomainError(msg.str());
    }
  }
}

IvpSolution integrate_ivp(const IvpSpec& spec, std::size_t steps)
{
  validate(spec);
  if (steps < 16)
    throw DomainError("IVP integration needs at least 16 steps");
  const double step = (spec.b - spec.a) / static_cast<double>(steps);
  IvpSolution sol;
  sol.grid.resize(steps + 1);
  sol.values.resize(steps + 1);
  sol.grid[0] = spec.a;
  sol.values[0] = spec.theta0;
  double h = spec.theta0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double y = spec.a + step * static_cast<double>(k);
    const double k1 = spec.rhs(y, h);
    const double k2 = spec.rhs(y + 0.5 * step, h + 0.5 * step * k1);
    const double k3 = spec.rhs(y + 0.5 * step, h + 0.5 * step * k2);
    const double k4 = spec.rhs(y + step, h + step * k3);
    h += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double next = k + 1 == steps ? spec.b : spec.a + step * static_cast<double>(k + 1);
    if (!std::isfinite(h)) {
      std::ostringstream msg;
      msg << "IVP solution became non-finite at y = " << next;
      throw NumericalError(msg.str());
    }
    if (h <= 0.0) {
      std::ostringstream msg;
      msg << "IVP solution left the positive reals at y = " << next << " (h = " << h << ")";
      throw DomainError(msg.str());
    }
    sol.grid[k + 1] = next;
    sol.values[k + 1] = h;
  }
  return sol;
}

UniquenessReport uniqueness_probe(const IvpSpec& spec, std::size_t steps, double threshold)
{
  if (steps % 2 != 0)
    throw DomainError("uniqueness probe needs an even step count");
  UniquenessReport rep;
  rep.steps = steps;
  rep.threshold = threshold;
  const IvpSolution coarse = integrate_ivp(spec, steps);
  const IvpSolution fine = integrate_ivp(spec, 2 * steps);
  for (std::size_t k = 0; k <= steps; ++k)
    rep.step_doubling = std::max(rep.step_doubling, std::abs(coarse.values[k] - fine.values[2 * k]));

  const std::size_t mid = steps / 2;
  IvpSpec restart = spec;
  restart.a = coarse.grid[mid];
  restart.theta0 = coarse.values[mid];
  const IvpSolution second = integrate_ivp(restart, std::max<std::size_t>(16, steps - mid));
  for (std::size_t k = 0; k < second.grid.size(); ++k)
    rep.midpoint_restart =
      std::max(rep.midpoint_restart, std::abs(second.values[k] - coarse.values[mid + k]));
  rep.max_deviation = std::max(rep.step_doubling, rep.midpoint_restart);
  rep.consistent = rep.max_deviation <= threshold;
  return rep;
}

IvpSpec reconstruction_ivp(const LambdaFn& lambda, const Identification& id, double a, double b,
                           double theta0)
{
  if (id.y0 >= std::min(a, b) && id.y0 <= std::max(a, b)) {
    std::ostringstream msg;
    msg << "IVP interval [" << a << ", " << b << "] contains y0 = " << id.y0
        << " where lambda vanishes and the ODE is undefined";
    throw DomainError(msg.str());
  }
  IvpSpec spec;
  spec.a = a;
  spec.b = b;
  spec.theta0 = theta0;
  spec.rhs = [lambda, A = id.A, B = id.B](double y, double h) { return -(A + B * h) / lambda(y); };
  return spec;
}

CrossCheckReport closed_form_crosscheck(const LambdaFn& lambda, double y0, double B, double a,
                                        double b, std::size_t steps, double uniqueness_threshold)
{
  if (!(y0 < a && a < b))
    throw DomainError("cross-check interval must satisfy y0 < a < b");
  const Identification id{ y0, 0.0, B };
  CrossCheckReport rep;
  rep.a = a;
  rep.b = b;
  rep.steps = steps;

  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    grid[k] = k == steps ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(steps);
  const std::vector<double> closed = reconstruct_upper(lambda, id, b, 1.0, grid, 0.0);
  const IvpSpec spec = reconstruction_ivp(lambda, id, a, b, closed.front());
  const IvpSolution ode = integrate_ivp(spec, steps);
  for (std::size_t k = 0; k <= steps; ++k)
    rep.sup_deviation = std::max(rep.sup_deviation, std::abs(ode.values[k] - closed[k]));
  rep.uniqueness = uniqueness_probe(spec, steps, uniqueness_threshold);
  return rep;
}

std::string to_string(GronwallVerdict v)
{
  switch (v) {
    case GronwallVerdict::holds:
      return "holds";
    case GronwallVerdict::hypothesis_fails:
      return "hypothesis_fails";
    case GronwallVerdict::conclusion_violated:
      return "conclusion_violated";
  }
  return "unknown";
}

GronwallResult gronwall_check(const GronwallInstance& inst, std::size_t resolution, double slack)
{
  if (resolution < 64)
    throw DomainError("Gronwall check needs at least 64 grid points");
  if (!(inst.a < inst.b))
    throw DomainError("Gronwall interval needs a < b");
  const double step = (inst.b - inst.a) / static_cast<double>(resolution - 1);
  std::vector<double> y(resolution), u(resolution), v(resolution), q(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    y[k] = k + 1 == resolution ? inst.b : inst.a + step * static_cast<double>(k);
    u[k] = inst.u(y[k]);
    v[k] = inst.v(y[k]);
    q[k] = inst.q(y[k]);
    if (!std::isfinite(u[k]) || !std::isfinite(v[k]) || !std::isfinite(q[k])) {
      std::ostringstream msg;
      msg << "Gronwall instance is not finite at y = " << y[k];
      throw DomainError(msg.str());
    }
    if (q[k] < 0.0) {
      std::ostringstream msg;
      msg << "Gronwall kernel q is negative at y = " << y[k];
      throw DomainError(msg.str());
    }
  }

  GronwallResult res;
  res.hypothesis_excess = -1e300;
  double int_qu = 0.0;
  for (std::size_t k = 0; k < resolution; ++k) {
    if (k > 0)
      int_qu += 0.5 * step * (q[k - 1] * u[k - 1] + q[k] * u[k]);
    res.hypothesis_excess = std::max(res.hypothesis_excess, u[k] - (v[k] + int_qu));
  }
  if (res.hypothesis_excess > slack) {
    res.verdict = GronwallVerdict::hypothesis_fails;
    return res;
  }

  // bound = v + exp(Q(y)) int_a^y v q exp(-Q), Q(y) = int_a^y q
  res.conclusion_excess = -1e300;
  double Q = 0.0;
  double inner = 0.0;
  double prev = v[0] * q[0];
  for (std::size_t k = 0; k < resolution; ++k) {
    if (k > 0) {
      Q += 0.5 * step * (q[k - 1] + q[k]);
      const double cur = v[k] * q[k] * std::exp(-Q);
      inner += 0.5 * step * (prev + cur);
      prev = cur;
    }
    const double bound = v[k] + std::exp(Q) * inner;
    res.conclusion_excess = std::max(res.conclusion_excess, u[k] - bound);
  }
  res.verdict = res.conclusion_excess > slack ? GronwallVerdict::conclusion_violated
                                              : GronwallVerdict::holds;
  return res;
}

GronwallInstance random_gronwall_instance(std::uint64_t seed, std::size_t resolution)
{
  if (resolution < 64)
    throw DomainError("Gronwall instances need at least 64 grid points");
  std::mt19937_64 gen(seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * to_open_unit(gen()); };
  std::array<double, 4> cv{};
  std::array<double, 4> cq{};
  for (double& c : cv)
    c = uniform(-1.0, 1.0);
  for (double& c : cq)
    c = uniform(-1.0, 1.0);
  const double b = uniform(0.5, 2.0);
  const double margin = uniform(0.01, 0.11);

  auto cubic = [](const std::array<double, 4>& c, double y) {
    return ((c[3] * y + c[2]) * y + c[1]) * y + c[0];
  };
  GronwallInstance inst;
  inst.a = 0.0;
  inst.b = b;
  inst.v = [cv, cubic](double y) { return cubic(cv, y); };
  inst.q = [cq, cubic](double y) { return std::abs(cubic(cq, y)); };

  // discrete solution of u = v - margin + int q u on the check grid
  const double step = b / static_cast<double>(resolution - 1);
  std::vector<double> grid(resolution), u(resolution);
  double partial = 0.0; // trapezoid sum without the q_k u_k end term
  for (std::size_t k = 0; k < resolution; ++k) {
    grid[k] = k + 1 == resolution ? b : step * static_cast<double>(k);
    const double qk = inst.q(grid[k]);
    const double forcing = inst.v(grid[k]) - margin;
    u[k] = k == 0 ? forcing : (forcing + partial) / (1.0 - 0.5 * step * qk);
    partial += (k == 0 ? 0.5 : 1.0) * step * qk * u[k];
  }
  inst.u = [grid, u](double y) { return numerics::linear_interpolate(grid, u, y); };
  return inst;
}

GronwallSuiteReport run_gronwall_suite(std::size_t instances, std::size_t resolution,
                                       std::uint64_t seed, double slack)
{
  GronwallSuiteReport rep;
  rep.instances = instances;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::uint64_t s = mix_seed(seed, k);
    const GronwallResult r = gronwall_check(random_gronwall_instance(s, resolution), resolution, slack);
    switch (r.verdict) {
      case GronwallVerdict::holds:
        ++rep.holds;
        break;
      case GronwallVerdict::hypothesis_fails:
        ++rep.hypothesis_fails;
        rep.failing_seeds.push_back(s);
        break;
      case GronwallVerdict::conclusion_violated:
        ++rep.conclusion_violated;
        rep.failing_seeds.push_back(s);
        break;
    }
    if (r.verdict != GronwallVerdict::hypothesis_fails)
      rep.max_conclusion_excess = std::max(rep.max_conclusion_excess, r.conclusion_excess);
  }
  return rep;
}

bool VerificationReport::passed() const
{
  return gronwall.conclusion_violated == 0 && crosscheck.sup_deviation <= crosscheck_tol &&
         crosscheck.uniqueness.consistent;
}

std::string VerificationReport::to_text() const
{
  std::ostringstream out;
  out.precision(6);
  out << "model = " << model << "\n";
  out << "gronwall.instances = " << gronwall.instances << "\n";
  out << "gronwall.holds = " << gronwall.holds << "\n";
  out << "gronwall.hypothesis_fails = " << gronwall.hypothesis_fails << "\n";
  out << "gronwall.conclusion_violated = " << gronwall.conclusion_violated << "\n";
  out << "gronwall.max_conclusion_excess = " << gronwall.max_conclusion_excess << "\n";
  out << "gronwall.failing_seeds =";
  for (std::uint64_t s : gronwall.failing_seeds)
    out << " " << s;
  out << "\n";
  out << "crosscheck.interval = [" << crosscheck.a << ", " << crosscheck.b << "]\n";
  out << "crosscheck.steps = " << crosscheck.steps << "\n";
  out << "crosscheck.sup_deviation = " << crosscheck.sup_deviation << "\n";
  out << "crosscheck.tolerance = " << crosscheck_tol << "\n";
  out << "uniqueness.step_doubling = " << crosscheck.uniqueness.step_doubling << "\n";
  out << "uniqueness.midpoint_restart = " << crosscheck.uniqueness.midpoint_restart << "\n";
  out << "uniqueness.threshold = " << crosscheck.uniqueness.threshold << "\n";
  out << "status = " << (passed() ? "pass" : "fail") << "\n";
  return out.str();
}

} // namespace trafoid
