#include "trafoid/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "trafoid/error.hpp"
#include "trafoid/estimator.hpp"
#include "trafoid/lambda.hpp"
#include "trafoid/monte_carlo.hpp"
#include "trafoid/ode_verify.hpp"
#include "trafoid/reconstruction.hpp"
#include "trafoid/samples.hpp"

#ifndef TRAFOID_VERSION
#define TRAFOID_VERSION "unknown"
#endif

namespace trafoid {

namespace {

TransformationModel model_from(const RunConfig& cfg)
{
  ModelSpec spec;
  const std::string preset = cfg.text("model.preset");
  if (preset != "custom")
    spec.preset = preset;
  spec.h = cfg.text("model.h");
  spec.h_param = cfg.real("model.h.param");
  spec.h_offset = cfg.real("model.h.offset");
  spec.g = cfg.text("model.g");
  spec.g_intercept = cfg.real("model.g.intercept");
  spec.g_coef = cfg.reals("model.g.coef");
  spec.sigma = cfg.text("model.sigma");
  spec.sigma_scale = cfg.real("model.sigma.scale");
  spec.sigma_coef = cfg.reals("model.sigma.coef");
  spec.error = cfg.text("model.error");
  try {
    return build_model(spec);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

double quantile_of(std::vector<double> v, double p)
{
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

WeightFunction weight_from(const RunConfig& cfg, std::size_t dim, const SampleSet* samples)
{
  const std::size_t index = cfg.count("weight.index") - 1;
  if (index >= dim)
    throw ConfigError("weight.index exceeds the covariate dimension");
  Box box;
  if (cfg.is_set("weight.lower")) {
    box.lower = cfg.reals("weight.lower");
    box.upper = cfg.reals("weight.upper");
    if (box.lower.size() != dim || box.upper.size() != dim)
      throw ConfigError("weight.lower and weight.upper need one value per covariate");
    for (std::size_t d = 0; d < dim; ++d)
      if (!(box.lower[d] < box.upper[d]))
        throw ConfigError("weight box needs lower < upper in every coordinate");
  } else if (samples) {
    // central 80% of each covariate keeps supp(v) inside the data
    std::vector<double> column(samples->size());
    for (std::size_t d = 0; d < dim; ++d) {
      for (std::size_t j = 0; j < samples->size(); ++j)
        column[j] = samples->x(j)[d];
      box.lower.push_back(quantile_of(column, 0.1));
      box.upper.push_back(quantile_of(column, 0.9));
    }
  } else {
    box.lower.assign(dim, 0.0);
    box.upper.assign(dim, 1.0);
  }
  return WeightFunction(box, index);
}

struct ConstraintChoice
{
  ConstraintSet constraints;
  Identification id;
};

ConstraintChoice constraints_from(const RunConfig& cfg, Identification id)
{
  const std::string kind = cfg.text("constraints.kind");
  if (kind == "two_point")
    return { TwoPoint{ cfg.real("constraints.ya"), cfg.real("constraints.yb"),
                       cfg.real("constraints.alpha_a"), cfg.real("constraints.alpha_b") },
             id };
  if (kind == "point_slope")
    return { PointSlope{ cfg.real("constraints.ya"), cfg.real("constraints.alpha_a"),
                         cfg.real("constraints.slope") },
             id };
  if (cfg.boolean("constraints.normalize"))
    id.A = 0.0;
  const double y1 = id.y0 + cfg.real("constraints.y1_offset");
  const double alpha =
    cfg.is_set("constraints.alpha") ? cfg.real("constraints.alpha") : -id.A / id.B + 1.0;
  return { Canonical{ y1, alpha }, id };
}

ReconstructionOptions reconstruction_options(const RunConfig& cfg, double y0)
{
  ReconstructionOptions opts;
  opts.excision_fraction = cfg.real("reconstruction.excision");
  if (cfg.is_set("reconstruction.y2_offset"))
    opts.y2 = y0 - cfg.real("reconstruction.y2_offset");
  const double tol = cfg.real("reconstruction.quadrature_tol");
  opts.quadrature = { tol, tol, 4000 };
  opts.residual_tol = cfg.real("reconstruction.residual_tol");
  return opts;
}

KernelConfig kernel_from(const RunConfig& cfg)
{
  KernelConfig k;
  k.cx = cfg.real("kernel.cx");
  k.cy = cfg.real("kernel.cy");
  if (cfg.is_set("kernel.bandwidth_x"))
    k.bandwidth_x = cfg.reals("kernel.bandwidth_x");
  if (cfg.is_set("kernel.bandwidth_y"))
    k.bandwidth_y = cfg.real("kernel.bandwidth_y");
  k.min_effective = cfg.real("kernel.min_effective");
  return k;
}

LambdaEstimateOptions lambda_options(const RunConfig& cfg)
{
  LambdaEstimateOptions o;
  o.grid_points = cfg.count("estimate.grid_points");
  o.trim_lower = cfg.real("estimate.trim_lower");
  o.trim_upper = cfg.real("estimate.trim_upper");
  o.slope_window = cfg.real("estimate.slope_window");
  o.b_floor = cfg.real("lambda.b_floor");
  return o;
}

// scale k and offset c with c + k h satisfying the constraints exactly
std::pair<double, double> affine_to_constraints(const TransformationModel& m,
                                                const ConstraintSet& cs, const Identification& id)
{
  if (const auto* c = std::get_if<Canonical>(&cs)) {
    const double location = -id.A / id.B;
    const double k = (c->alpha - location) / (m.h(c->y1) - m.h(id.y0));
    return { k, location - k * m.h(id.y0) };
  }
  if (const auto* t = std::get_if<TwoPoint>(&cs)) {
    const double k = (t->alpha_b - t->alpha_a) / (m.h(t->yb) - m.h(t->ya));
    return { k, t->alpha_a - k * m.h(t->ya) };
  }
  const auto& p = std::get<PointSlope>(cs);
  const double k = p.slope / m.dh(p.ya);
  return { k, p.alpha_a - k * m.h(p.ya) };
}

std::vector<std::vector<double>> interior_points(const WeightFunction& weight, std::size_t count)
{
  const Box& box = weight.support();
  std::vector<std::vector<double>> xs;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> x(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d)
      x[d] = 0.5 * (box.lower[d] + box.upper[d]);
    const std::size_t i = weight.index();
    x[i] = box.lower[i] + (static_cast<double>(k) + 0.5) / static_cast<double>(count) *
                            (box.upper[i] - box.lower[i]);
    xs.push_back(std::move(x));
  }
  return xs;
}

Metadata manifest(const RunConfig& cfg)
{
  Metadata m{ { "trafoid_version", version() }, { "mode", to_string(cfg.mode()) },
              { "seed", std::to_string(cfg.seed()) } };
  for (auto& kv : cfg.echo())
    if (kv.first != "seed")
      m.push_back(kv);
  return m;
}

std::string box_text(const Box& box)
{
  std::string out;
  for (std::size_t d = 0; d < box.dim(); ++d)
    out += (d ? " x " : "") + std::string("[") + format_double(box.lower[d]) + ", " +
           format_double(box.upper[d]) + "]";
  return out;
}

RunResult run_oracle(const RunConfig& cfg)
{
  RunResult res;
  const TransformationModel model = model_from(cfg);
  const WeightFunction weight = weight_from(cfg, model.dim(), nullptr);
  const double qtol = cfg.real("lambda.quadrature_tol");
  const numerics::QuadratureOptions quad{ qtol, qtol, 4000 };

  const CoefficientPair ab = compute_coefficients(model, weight, quad);
  if (!(std::abs(ab.B) >= cfg.real("lambda.b_floor"))) {
    const std::vector<double> ys = uniform_grid(-3.0, 3.0, 41);
    const auto verdict = homoscedasticity_diagnostic(
      oracle_lambda_tilde_grid(model, weight.index(), ys, interior_points(weight, 5), qtol),
      cfg.real("lambda.noise_multiplier"));
    std::ostringstream msg;
    msg << "B = " << ab.B << " is below lambda.b_floor; the model is not identified by this "
        << "construction (homoscedasticity diagnostic: " << to_string(verdict) << ")";
    throw IdentificationError(msg.str());
  }

  OracleFieldOptions fo;
  fo.search_lower = cfg.real("lambda.search_lower");
  fo.search_upper = cfg.real("lambda.search_upper");
  fo.grid_half_width = cfg.real("grid.half_width");
  fo.grid_points = cfg.count("grid.points");
  fo.quadrature = quad;
  const LambdaField field = oracle_lambda_field(model, weight, fo);
  const numerics::DerivativeEstimate b_rec = recover_B(field.lambda, field.y0);

  const ConstraintChoice choice = constraints_from(cfg, { field.y0, ab.A, ab.B });
  const ReconstructionOptions ropts = reconstruction_options(cfg, field.y0);
  const ReconstructedTransform rt =
    reconstruct_constrained(field.lambda, choice.id, choice.constraints, field.grid, ropts);
  if (rt.max_scaled_residual() > ropts.residual_tol) {
    std::ostringstream msg;
    msg << "ODE residual " << rt.max_scaled_residual() << " exceeds reconstruction.residual_tol "
        << ropts.residual_tol;
    throw NumericalError(msg.str());
  }

  const auto [k, c] = affine_to_constraints(model, choice.constraints, choice.id);
  std::vector<double> truth(rt.grid.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < rt.grid.size(); ++i) {
    truth[i] = c + k * model.h(rt.grid[i]);
    if (!rt.interpolated[i])
      max_err = std::max(max_err, std::abs(rt.values[i] - truth[i]));
  }

  const std::vector<double> ys_diag(rt.grid.begin(), rt.grid.end());
  const auto verdict = homoscedasticity_diagnostic(
    oracle_lambda_tilde_grid(model, weight.index(), ys_diag, interior_points(weight, 5), qtol),
    cfg.real("lambda.noise_multiplier"));

  Metadata rmeta = reconstruction_metadata(rt, choice.constraints, ropts);
  rmeta.emplace_back("model", model.name());
  rmeta.emplace_back("max_abs_error_vs_truth", format_double(max_err));
  res.artifacts.add("reconstruction.csv", reconstruction_to_csv(rt));
  res.artifacts.add("reconstruction.meta", format_metadata(rmeta));

  res.artifacts.add("lambda.csv", lambda_to_csv(rt.grid, rt.lambda_values));
  const Metadata lmeta{
    { "model", model.name() },
    { "A", format_double(ab.A) },
    { "B", format_double(ab.B) },
    { "y0", format_double(field.y0) },
    { "B_recovered", format_double(b_rec.value) },
    { "B_recovered.error", format_double(b_rec.error) },
    { "weight.box", box_text(weight.support()) },
    { "weight.index", std::to_string(weight.index() + 1) },
    { "quadrature_tol", format_double(qtol) },
    { "diagnostic", to_string(verdict) },
  };
  res.artifacts.add("lambda.meta", format_metadata(lmeta));

  std::string plot = "y,h,h_true,lambda,residual,interpolated_flag\n";
  for (std::size_t i = 0; i < rt.grid.size(); ++i)
    plot += format_double(rt.grid[i]) + "," + format_double(rt.values[i]) + "," +
            format_double(truth[i]) + "," + format_double(rt.lambda_values[i]) + "," +
            format_double(rt.residuals[i]) + "," + (rt.interpolated[i] ? "1" : "0") + "\n";
  res.artifacts.add("plot_data.csv", plot);

  std::ostringstream sum;
  sum << "oracle " << model.name() << ": A = " << ab.A << ", B = " << ab.B << ", y0 = " << field.y0
      << ", max |h - h_true| = " << max_err;
  res.summary = sum.str();
  return res;
}

RunResult run_simulate(const RunConfig& cfg)
{
  RunResult res;
  const TransformationModel model = model_from(cfg);
  Box box;
  if (cfg.is_set("simulate.covariate_lower")) {
    box.lower = cfg.reals("simulate.covariate_lower");
    box.upper = cfg.reals("simulate.covariate_upper");
    if (box.lower.size() != model.dim() || box.upper.size() != model.dim())
      throw ConfigError("simulate covariate box needs one value per covariate");
  } else {
    box = weight_from(cfg, model.dim(), nullptr).support();
  }
  const std::size_t n = cfg.count("simulate.n");
  const SampleSet samples = simulate(model, n, cfg.seed(), box);
  res.artifacts.add("samples.csv", samples_to_csv(samples));
  res.summary = "simulated " + std::to_string(n) + " rows from " + model.name();
  return res;
}

RunResult run_estimate(const RunConfig& cfg)
{
  RunResult res;
  const SampleSet samples = read_samples_csv(cfg.text("input.path"));
  const WeightFunction weight = weight_from(cfg, samples.dim(), &samples);
  const KernelConfig kernel = kernel_from(cfg);

  SampleDiagnosticOptions dopts;
  dopts.noise_multiplier = cfg.real("lambda.noise_multiplier");
  dopts.bandwidth_scale = cfg.real("estimate.diagnostic_bandwidth_scale");
  dopts.trim_lower = cfg.real("estimate.trim_lower");
  dopts.trim_upper = cfg.real("estimate.trim_upper");
  std::string verdict;
  try {
    verdict = to_string(sample_homoscedasticity_diagnostic(samples, kernel, weight, dopts));
  } catch (const IdentificationError& e) {
    verdict = std::string("unavailable (") + e.what() + ")";
  }

  LambdaEstimate est;
  try {
    est = estimate_lambda(samples, kernel, weight, lambda_options(cfg));
  } catch (const IdentificationError& e) {
    throw IdentificationError(std::string(e.what()) + "; diagnostic verdict: " + verdict);
  }

  PluginOptions popts;
  popts.lambda = lambda_options(cfg);
  popts.reconstruction = reconstruction_options(cfg, est.y0);
  popts.reconstruction.quadrature = { 1e-10, 1e-10, 2000 };
  popts.reconstruction.repair_monotonicity = true;
  const ConstraintChoice choice = constraints_from(cfg, { est.y0, 0.0, est.B });
  const std::vector<double> grid =
    uniform_grid(est.grid.front(), est.grid.back(), cfg.count("estimate.eval_points"));
  PluginResult fit = plugin_transform(est.function(), est.y0, est.B, choice.constraints, grid, popts);

  res.artifacts.add("lambda_hat.csv", lambda_estimate_to_csv(est));
  res.artifacts.add("h_hat.csv", reconstruction_to_csv(fit.transform));

  Metadata diag{
    { "n", std::to_string(samples.size()) },
    { "dim", std::to_string(samples.dim()) },
    { "weight.box", box_text(weight.support()) },
    { "weight.index", std::to_string(weight.index() + 1) },
    { "bandwidth_y", format_double(est.bandwidths.y) },
  };
  for (std::size_t d = 0; d < est.bandwidths.x.size(); ++d)
    diag.emplace_back("bandwidth_x" + std::to_string(d + 1), format_double(est.bandwidths.x[d]));
  diag.emplace_back("y0", format_double(est.y0));
  diag.emplace_back("B", format_double(est.B));
  diag.emplace_back("slope_window", format_double(est.window));
  diag.emplace_back("crossings", std::to_string(est.crossings));
  diag.emplace_back("sign_violations", std::to_string(est.sign_violations));
  diag.emplace_back("alpha2", format_double(fit.transform.alpha2));
  diag.emplace_back("repaired_points", std::to_string(fit.transform.repaired_points));
  diag.emplace_back("repair_rate", format_double(fit.repair_rate));
  diag.emplace_back("constraints", describe(choice.constraints));
  diag.emplace_back("homoscedasticity_diagnostic", verdict);
  if (est.sign_violations > 0)
    fit.warnings.push_back("lambda-hat has the wrong sign at " + std::to_string(est.sign_violations) +
                           " tabulated points outside the slope window");
  for (std::size_t w = 0; w < fit.warnings.size(); ++w)
    diag.emplace_back("warning" + std::to_string(w + 1), fit.warnings[w]);
  res.artifacts.add("diagnostics.txt", format_metadata(diag));
  res.warnings = fit.warnings;

  std::ostringstream sum;
  sum << "estimate: n = " << samples.size() << ", y0 = " << est.y0 << ", B = " << est.B
      << ", diagnostic " << verdict;
  res.summary = sum.str();
  return res;
}

RunResult run_verify(const RunConfig& cfg)
{
  RunResult res;
  const TransformationModel model = model_from(cfg);
  const WeightFunction weight = weight_from(cfg, model.dim(), nullptr);
  const double qtol = cfg.real("lambda.quadrature_tol");
  const CoefficientPair ab =
    coefficients_AB(model, weight, { qtol, qtol, 4000 }, cfg.real("lambda.b_floor"));
  OracleFieldOptions fo;
  fo.search_lower = cfg.real("lambda.search_lower");
  fo.search_upper = cfg.real("lambda.search_upper");
  fo.quadrature = { qtol, qtol, 4000 };
  const LambdaField field = oracle_lambda_field(model, weight, fo);

  VerificationReport rep;
  rep.model = model.name();
  rep.crosscheck_tol = cfg.real("verify.tolerance");
  rep.gronwall = run_gronwall_suite(cfg.count("verify.gronwall_instances"),
                                    cfg.count("verify.gronwall_resolution"), cfg.seed());
  std::size_t steps = cfg.count("verify.ivp_steps");
  steps += steps % 2;
  rep.crosscheck = closed_form_crosscheck(field.lambda, field.y0, ab.B,
                                          field.y0 + cfg.real("verify.start_offset"),
                                          field.y0 + cfg.real("verify.end_offset"), steps,
                                          rep.crosscheck_tol);
  res.artifacts.add("verification_report.txt", rep.to_text());
  res.exit_code = rep.passed() ? exit_ok : exit_verification;
  std::ostringstream sum;
  sum << "verify " << model.name() << ": gronwall " << rep.gronwall.holds << "/"
      << rep.gronwall.instances << " hold, " << rep.gronwall.conclusion_violated
      << " violated; closed form vs IVP " << rep.crosscheck.sup_deviation << "; "
      << (rep.passed() ? "pass" : "FAIL");
  res.summary = sum.str();
  return res;
}

RunResult run_mc(const RunConfig& cfg)
{
  RunResult res;
  MonteCarloPlan plan;
  plan.model = cfg.text("model.preset");
  if (plan.model == "custom")
    throw ConfigError("mc mode needs a registered model.preset");
  plan.sizes = cfg.counts("mc.sizes");
  plan.replications = cfg.count("mc.replications");
  plan.seed = cfg.seed();
  plan.eval_lower = cfg.real("mc.eval_lower");
  plan.eval_upper = cfg.real("mc.eval_upper");
  plan.eval_points = cfg.count("mc.eval_points");
  plan.norm_lower = cfg.real("mc.norm_lower");
  plan.norm_upper = cfg.real("mc.norm_upper");
  plan.metric = metric_from_string(cfg.text("mc.metric"));
  plan.covariate_margin = cfg.real("mc.covariate_margin");
  plan.workers = cfg.count("mc.workers");
  plan.kernel = kernel_from(cfg);
  plan.plugin.lambda = lambda_options(cfg);
  const MonteCarloResults mc = run_monte_carlo(plan);
  res.artifacts.add("results.csv", mc.results_csv());
  res.artifacts.add("summary.csv", mc.summary_csv());
  std::ostringstream sum;
  sum << "mc " << plan.model << ":";
  for (const MonteCarloCell& c : mc.cells)
    sum << " n=" << c.n << " median " << c.median << " (" << c.fail_count << " failed)";
  res.summary = sum.str();
  return res;
}

} // namespace

std::string version()
{
  return TRAFOID_VERSION;
}

int exit_code_for(const std::exception& e)
{
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err)
    return exit_unexpected;
  switch (err->kind()) {
    case ErrorKind::config:
    case ErrorKind::domain:
      return exit_config;
    case ErrorKind::identification:
      return exit_identification;
    case ErrorKind::numerical:
      return exit_numerical;
    case ErrorKind::io:
      return exit_io;
    case ErrorKind::verification:
      return exit_verification;
  }
  return exit_unexpected;
}

RunResult execute(const RunConfig& cfg)
{
  cfg.validate();
  RunResult res;
  switch (cfg.mode()) {
    case Mode::oracle:
      res = run_oracle(cfg);
      break;
    case Mode::simulate:
      res = run_simulate(cfg);
      break;
    case Mode::estimate:
      res = run_estimate(cfg);
      break;
    case Mode::verify:
      res = run_verify(cfg);
      break;
    case Mode::mc:
      res = run_mc(cfg);
      break;
  }
  res.artifacts.add("manifest.txt", format_metadata(manifest(cfg)));
  return res;
}

std::filesystem::path output_directory(const RunConfig& cfg)
{
  if (cfg.is_set("output.dir"))
    return cfg.text("output.dir");
  const char* root = std::getenv("TRAFOID_OUTPUT_ROOT");
  const std::filesystem::path base = root && *root ? root : "trafoid-output";
  return base / to_string(cfg.mode());
}

int run(const RunConfig& cfg, std::ostream& log)
{
  try {
    const RunResult res = execute(cfg);
    const auto dir = output_directory(cfg);
    res.artifacts.commit(dir);
    for (const auto& w : res.warnings)
      log << "warning: " << w << "\n";
    log << res.summary << "\n";
    log << "wrote " << res.artifacts.files().size() << " files to " << dir.string() << "\n";
    return res.exit_code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

} // namespace trafoid
