#include "trafoid/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "trafoid/error.hpp"

namespace trafoid {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p)
{
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

std::string to_string(ErrorMetric m)
{
  return m == ErrorMetric::sup_norm ? "sup_norm" : "ise";
}

ErrorMetric metric_from_string(const std::string& name)
{
  if (name == "sup_norm" || name == "sup")
    return ErrorMetric::sup_norm;
  if (name == "ise" || name == "integrated_squared")
    return ErrorMetric::integrated_squared;
  throw ConfigError("unknown error metric '" + name + "' (expected sup_norm or ise)");
}

void MonteCarloPlan::validate() const
{
  if (sizes.empty())
    throw ConfigError("mc.sizes must not be empty");
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k)
    if (!(sizes[k] < sizes[k + 1]))
      throw ConfigError("mc.sizes must be strictly increasing");
  if (replications < 10)
    throw ConfigError("mc.replications must be at least 10");
  if (!(eval_lower < eval_upper) || eval_points < 3)
    throw ConfigError("mc evaluation grid needs lower < upper and at least 3 points");
  if (!(norm_lower < norm_upper))
    throw ConfigError("mc normalisation points need norm_lower < norm_upper");
  if (!(covariate_margin >= 0.0))
    throw ConfigError("mc.covariate_margin must be nonnegative");
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t n, std::size_t rep)
{
  return mix_seed(mix_seed(base, n), rep);
}

double run_replication(const MonteCarloPlan& plan, std::size_t n, std::size_t rep)
{
  const TransformationModel model = registered_model(plan.model);
  const WeightFunction weight = unit_weight(model.dim());
  Box cov = weight.support();
  for (std::size_t d = 0; d < cov.dim(); ++d) {
    cov.lower[d] -= plan.covariate_margin;
    cov.upper[d] += plan.covariate_margin;
  }
  const SampleSet samples = simulate(model, n, cell_seed(plan.seed, n, rep), cov);
  const std::vector<double> grid = uniform_grid(plan.eval_lower, plan.eval_upper, plan.eval_points);
  const TwoPoint target{ plan.norm_lower, plan.norm_upper, 0.0, 1.0 };
  const PluginResult fit = plugin_reconstruct(samples, plan.kernel, weight, target, grid, plan.plugin);

  const double h_lo = model.h(plan.norm_lower);
  const double h_hi = model.h(plan.norm_upper);
  std::vector<double> diff(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    diff[k] = fit.transform.values[k] - (model.h(grid[k]) - h_lo) / (h_hi - h_lo);

  if (plan.metric == ErrorMetric::sup_norm) {
    double m = 0.0;
    for (double d : diff)
      m = std::max(m, std::abs(d));
    return m;
  }
  double ise = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    ise += 0.5 * (grid[k + 1] - grid[k]) * (diff[k] * diff[k] + diff[k + 1] * diff[k + 1]);
  return ise;
}

MonteCarloResults run_monte_carlo(const MonteCarloPlan& plan)
{
  plan.validate();
  registered_model(plan.model);

  MonteCarloResults res;
  res.model = plan.model;
  res.metric = plan.metric;
  for (std::size_t n : plan.sizes)
    for (std::size_t r = 0; r < plan.replications; ++r)
      res.rows.push_back({ n, r, 0.0, {} });

  std::atomic<std::size_t> next{ 0 };
  auto worker = [&] {
    for (std::size_t i = next++; i < res.rows.size(); i = next++) {
      MonteCarloRow& row = res.rows[i];
      try {
        row.value = run_replication(plan, row.n, row.rep);
      } catch (const std::exception& e) {
        row.value = std::numeric_limits<double>::quiet_NaN();
        row.failure = e.what();
      }
    }
  };
  std::size_t workers = plan.workers ? plan.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, res.rows.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();

  for (std::size_t n : plan.sizes) {
    MonteCarloCell cell;
    cell.n = n;
    std::vector<double> ok;
    for (const MonteCarloRow& row : res.rows) {
      if (row.n != n)
        continue;
      if (std::isnan(row.value))
        ++cell.fail_count;
      else
        ok.push_back(row.value);
    }
    cell.valid = 2 * cell.fail_count <= plan.replications && !ok.empty();
    if (cell.valid) {
      std::sort(ok.begin(), ok.end());
      cell.median = quantile_sorted(ok, 0.5);
      cell.iqr = quantile_sorted(ok, 0.75) - quantile_sorted(ok, 0.25);
    } else {
      cell.median = std::numeric_limits<double>::quiet_NaN();
      cell.iqr = std::numeric_limits<double>::quiet_NaN();
    }
    res.cells.push_back(cell);
  }
  return res;
}

std::string MonteCarloResults::results_csv() const
{
  std::string out = "model,n,rep,metric,value\n";
  for (const MonteCarloRow& row : rows)
    out += model + "," + std::to_string(row.n) + "," + std::to_string(row.rep) + "," +
           to_string(metric) + "," + format_double(row.value) + "\n";
  return out;
}

std::string MonteCarloResults::summary_csv() const
{
  std::string out = "model,n,median,iqr,fail_count\n";
  for (const MonteCarloCell& c : cells)
    out += model + "," + std::to_string(c.n) + "," + format_double(c.median) + "," +
           format_double(c.iqr) + "," + std::to_string(c.fail_count) + "\n";
  return out;
}

} // namespace trafoid
