#include "trafoid/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "trafoid/error.hpp"

namespace trafoid {

namespace {

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    out.push_back(trim(item));
  return out;
}

bool parse_real(const std::string& s, double& out)
{
  if (s.empty())
    return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out)
{
  if (s.empty())
    return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return errno == 0 && end == s.c_str() + s.size();
}

const char* type_name(ValueType t)
{
  switch (t) {
    case ValueType::text:
      return "text";
    case ValueType::real:
      return "a real number";
    case ValueType::integer:
      return "an integer";
    case ValueType::boolean:
      return "true or false";
    case ValueType::real_list:
      return "a comma-separated list of reals";
    case ValueType::integer_list:
      return "a comma-separated list of integers";
  }
  return "a value";
}

[[noreturn]] void bad_value(const std::string& origin, const std::string& key,
                            const std::string& value, const std::string& expected)
{
  std::ostringstream msg;
  msg << origin << ": key '" << key << "': expected " << expected << ", got '" << value << "'";
  throw ConfigError(msg.str());
}

void check_value(const KeySpec& spec, const std::string& value, const std::string& origin)
{
  auto check_real = [&](const std::string& s) {
    double v = 0.0;
    if (!parse_real(s, v))
      bad_value(origin, spec.key, value, type_name(spec.type));
    if (spec.positive && !(v > 0.0))
      bad_value(origin, spec.key, value, "a positive value");
  };
  auto check_integer = [&](const std::string& s) {
    long long v = 0;
    if (!parse_integer(s, v))
      bad_value(origin, spec.key, value, type_name(spec.type));
    if (spec.positive && v <= 0)
      bad_value(origin, spec.key, value, "a positive value");
    if (v < 0)
      bad_value(origin, spec.key, value, "a nonnegative value");
  };
  switch (spec.type) {
    case ValueType::text:
      break;
    case ValueType::real:
      check_real(value);
      break;
    case ValueType::integer:
      check_integer(value);
      break;
    case ValueType::boolean:
      if (value != "true" && value != "false")
        bad_value(origin, spec.key, value, type_name(spec.type));
      break;
    case ValueType::real_list:
      for (const auto& item : split_list(value))
        check_real(item);
      break;
    case ValueType::integer_list:
      for (const auto& item : split_list(value))
        check_integer(item);
      break;
  }
}

} // namespace

std::string to_string(Mode m)
{
  switch (m) {
    case Mode::oracle:
      return "oracle";
    case Mode::simulate:
      return "simulate";
    case Mode::estimate:
      return "estimate";
    case Mode::verify:
      return "verify";
    case Mode::mc:
      return "mc";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& name)
{
  for (Mode m : { Mode::oracle, Mode::simulate, Mode::estimate, Mode::verify, Mode::mc })
    if (to_string(m) == name)
      return m;
  throw ConfigError("unknown mode '" + name + "' (expected oracle, simulate, estimate, verify or mc)");
}

const std::vector<KeySpec>& config_schema()
{
  using T = ValueType;
  static const std::vector<KeySpec> schema = {
    { "model.preset", T::text, "M1", "registered model (M1, M2, M3, M1neg, M4, M1L) or 'custom'" },
    { "model.h", T::text, "identity", "custom transformation: identity, sinh, cubic, affine" },
    { "model.h.param", T::real, "1", "sinh scale, cubic coefficient or affine slope" },
    { "model.h.offset", T::real, "0", "affine intercept" },
    { "model.g", T::text, "linear", "custom regression function: linear" },
    { "model.g.intercept", T::real, "0", "intercept of g" },
    { "model.g.coef", T::real_list, "1", "coefficients of g (one per covariate)" },
    { "model.sigma", T::text, "exp_linear", "custom scale function: exp_linear, constant" },
    { "model.sigma.scale", T::real, "1", "scale multiplier of sigma", true },
    { "model.sigma.coef", T::real_list, "1", "exponent coefficients of sigma" },
    { "model.error", T::text, "normal", "error law: normal, logistic" },
    { "weight.lower", T::real_list, "", "lower corner of the weight box (default: unit box; estimate: 10% covariate quantiles)" },
    { "weight.upper", T::real_list, "", "upper corner of the weight box (default: unit box; estimate: 90% covariate quantiles)" },
    { "weight.index", T::integer, "1", "covariate (1-based) whose partial enters lambda-tilde", true },
    { "lambda.search_lower", T::real, "-10", "lower end of the root search for y0" },
    { "lambda.search_upper", T::real, "10", "upper end of the root search for y0" },
    { "lambda.quadrature_tol", T::real, "1e-12", "absolute tolerance of the lambda quadrature", true },
    { "lambda.b_floor", T::real, "1e-8", "|B| below this is treated as homoscedastic", true },
    { "lambda.noise_multiplier", T::real, "3", "diagnostic threshold in units of the noise level", true },
    { "grid.half_width", T::real, "1.5", "oracle grid spans y0 -/+ half_width", true },
    { "grid.points", T::integer, "401", "oracle grid points", true },
    { "constraints.kind", T::text, "canonical", "canonical, two_point or point_slope" },
    { "constraints.normalize", T::boolean, "false", "canonical with A = 0 and alpha = 1" },
    { "constraints.y1_offset", T::real, "1", "canonical y1 = y0 + offset", true },
    { "constraints.alpha", T::real, "", "canonical h(y1) (default: -A/B + 1)" },
    { "constraints.ya", T::real, "-1", "two-point / point-slope anchor" },
    { "constraints.yb", T::real, "1", "two-point second point" },
    { "constraints.alpha_a", T::real, "0", "h(ya)" },
    { "constraints.alpha_b", T::real, "1", "h(yb)" },
    { "constraints.slope", T::real, "1", "h'(ya) for point_slope", true },
    { "reconstruction.excision", T::real, "1e-3", "excision half-width as a fraction of the grid range", true },
    { "reconstruction.y2_offset", T::real, "", "lower anchor y2 = y0 - offset (default: mirror of y1)", true },
    { "reconstruction.residual_tol", T::real, "1e-5", "ODE residual tolerance", true },
    { "reconstruction.quadrature_tol", T::real, "1e-13", "tolerance of the 1/lambda quadrature", true },
    { "simulate.n", T::integer, "1000", "sample size", true },
    { "simulate.covariate_lower", T::real_list, "", "covariate box lower corner (default: weight box)" },
    { "simulate.covariate_upper", T::real_list, "", "covariate box upper corner (default: weight box)" },
    { "input.path", T::text, "", "sample CSV (y,x1,...,xd) for estimate mode" },
    { "kernel.cx", T::real, "1", "covariate rule-of-thumb constant", true },
    { "kernel.cy", T::real, "1", "response rule-of-thumb constant", true },
    { "kernel.bandwidth_x", T::real_list, "", "fixed covariate bandwidths", true },
    { "kernel.bandwidth_y", T::real, "", "fixed response bandwidth", true },
    { "kernel.min_effective", T::real, "5", "floor on the local kernel mass", true },
    { "estimate.grid_points", T::integer, "121", "lambda-hat grid points", true },
    { "estimate.trim_lower", T::real, "0.05", "lower y quantile of the lambda-hat grid" },
    { "estimate.trim_upper", T::real, "0.95", "upper y quantile of the lambda-hat grid" },
    { "estimate.slope_window", T::real, "5", "linear window and B step in grid spacings", true },
    { "estimate.eval_points", T::integer, "121", "points of the h-hat grid", true },
    { "estimate.diagnostic_bandwidth_scale", T::real, "3", "covariate bandwidth factor of the diagnostic", true },
    { "verify.gronwall_instances", T::integer, "1000", "randomised Gronwall instances", true },
    { "verify.gronwall_resolution", T::integer, "256", "Gronwall check grid", true },
    { "verify.ivp_steps", T::integer, "2000", "RK4 steps of the cross-check", true },
    { "verify.start_offset", T::real, "0.075", "cross-check interval starts at y0 + offset", true },
    { "verify.end_offset", T::real, "1.5", "cross-check interval ends at y0 + offset", true },
    { "verify.tolerance", T::real, "1e-6", "closed form / IVP agreement tolerance", true },
    { "mc.sizes", T::integer_list, "500,2000,8000", "sample sizes (strictly increasing)", true },
    { "mc.replications", T::integer, "50", "replications per size", true },
    { "mc.metric", T::text, "sup_norm", "sup_norm or ise" },
    { "mc.eval_lower", T::real, "-1.5", "evaluation grid lower end" },
    { "mc.eval_upper", T::real, "1.5", "evaluation grid upper end" },
    { "mc.eval_points", T::integer, "121", "evaluation grid points", true },
    { "mc.norm_lower", T::real, "-1", "normalisation point with h = 0" },
    { "mc.norm_upper", T::real, "1", "normalisation point with h = 1" },
    { "mc.covariate_margin", T::real, "0.25", "covariate box = weight box widened by this margin" },
    { "mc.workers", T::integer, "0", "worker threads (0: hardware concurrency)" },
    { "output.dir", T::text, "", "output directory (default: $TRAFOID_OUTPUT_ROOT/<mode>)" },
    { "seed", T::integer, "20240601", "random seed" },
  };
  return schema;
}

const KeySpec* find_key(const std::string& key)
{
  for (const KeySpec& s : config_schema())
    if (s.key == key)
      return &s;
  return nullptr;
}

RunConfig::RunConfig(Mode mode)
  : mode_(mode)
{}

RunConfig RunConfig::parse(Mode mode, const std::string& text, const std::string& source)
{
  RunConfig cfg(mode);
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const std::string origin = source + " line " + std::to_string(number);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (cfg.values_.count(key))
      throw ConfigError(origin + ": duplicate key '" + key + "'");
    cfg.set(key, value, origin);
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& origin)
{
  const KeySpec* spec = find_key(key);
  if (!spec)
    throw ConfigError(origin + ": unknown key '" + key + "'");
  check_value(*spec, value, origin);
  values_[key] = { value, origin };
}

bool RunConfig::is_set(const std::string& key) const
{
  if (values_.count(key))
    return true;
  const KeySpec* spec = find_key(key);
  return spec && !spec->default_value.empty();
}

const std::string& RunConfig::raw(const std::string& key, std::string* origin) const
{
  const auto it = values_.find(key);
  if (it != values_.end()) {
    if (origin)
      *origin = it->second.origin;
    return it->second.value;
  }
  const KeySpec* spec = find_key(key);
  if (!spec)
    throw ConfigError("unknown key '" + key + "'");
  if (spec->default_value.empty())
    throw ConfigError("required key '" + key + "' is not set");
  if (origin)
    *origin = "default";
  return spec->default_value;
}

std::string RunConfig::text(const std::string& key) const
{
  return raw(key);
}

double RunConfig::real(const std::string& key) const
{
  double v = 0.0;
  parse_real(raw(key), v);
  return v;
}

long long RunConfig::integer(const std::string& key) const
{
  long long v = 0;
  parse_integer(raw(key), v);
  return v;
}

std::size_t RunConfig::count(const std::string& key) const
{
  return static_cast<std::size_t>(integer(key));
}

bool RunConfig::boolean(const std::string& key) const
{
  return raw(key) == "true";
}

std::vector<double> RunConfig::reals(const std::string& key) const
{
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) {
    double v = 0.0;
    parse_real(item, v);
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> RunConfig::counts(const std::string& key) const
{
  std::vector<std::size_t> out;
  for (const auto& item : split_list(raw(key))) {
    long long v = 0;
    parse_integer(item, v);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::uint64_t RunConfig::seed() const
{
  return static_cast<std::uint64_t>(integer("seed"));
}

void RunConfig::validate() const
{
  for (const auto& [key, entry] : values_)
    check_value(*find_key(key), entry.value, entry.origin);

  auto origin_of = [&](const std::string& key) {
    std::string o;
    raw(key, &o);
    return o;
  };
  const std::string kind = text("constraints.kind");
  if (kind != "canonical" && kind != "two_point" && kind != "point_slope")
    throw ConfigError(origin_of("constraints.kind") + ": constraints.kind must be canonical, two_point or point_slope");
  if (is_set("weight.lower") != is_set("weight.upper"))
    throw ConfigError("weight.lower and weight.upper must be given together");
  if (is_set("simulate.covariate_lower") != is_set("simulate.covariate_upper"))
    throw ConfigError("simulate.covariate_lower and simulate.covariate_upper must be given together");
  if (!(real("lambda.search_lower") < real("lambda.search_upper")))
    throw ConfigError("lambda.search_lower must be below lambda.search_upper");
  if (mode_ == Mode::estimate && !is_set("input.path"))
    throw ConfigError("estimate mode requires input.path");
  if (mode_ == Mode::mc)
    if (real("mc.covariate_margin") < 0.0)
      throw ConfigError(origin_of("mc.covariate_margin") + ": mc.covariate_margin must be nonnegative");
}

Metadata RunConfig::echo() const
{
  Metadata out;
  for (const KeySpec& spec : config_schema()) {
    if (spec.key == "output.dir" || !is_set(spec.key))
      continue;
    out.emplace_back(spec.key, raw(spec.key));
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace trafoid
