#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trafoid/estimator.hpp"

namespace trafoid {

enum class ErrorMetric
{
  sup_norm,
  integrated_squared
};

std::string to_string(ErrorMetric m);
ErrorMetric metric_from_string(const std::string& name);

/*
 * Convergence study: simulate, estimate, reconstruct and score each
 * (n, replication) cell. Both the estimate and the true h are mapped onto
 * the two-point normalisation h(norm_lower) = 0, h(norm_upper) = 1 before
 * scoring on the evaluation grid.
 */
struct MonteCarloPlan
{
  std::string model = "M1";
  std::vector<std::size_t> sizes{ 500, 2000, 8000 };
  std::size_t replications = 50;
  std::uint64_t seed = 20240601;
  double eval_lower = -1.5;
  double eval_upper = 1.5;
  std::size_t eval_points = 121;
  double norm_lower = -1.0;
  double norm_upper = 1.0;
  ErrorMetric metric = ErrorMetric::sup_norm;
  //! Covariates are drawn uniformly on the weight box widened by this margin.
  double covariate_margin = 0.25;
  std::size_t workers = 0;  //!< 0: hardware concurrency
  KernelConfig kernel;
  PluginOptions plugin;

  //! Throws ConfigError.
  void validate() const;
};

struct MonteCarloRow
{
  std::size_t n = 0;
  std::size_t rep = 0;
  double value = 0.0;  //!< NaN for failed replications
  std::string failure;
};

struct MonteCarloCell
{
  std::size_t n = 0;
  double median = 0.0;
  double iqr = 0.0;
  std::size_t fail_count = 0;
  bool valid = true;
};

struct MonteCarloResults
{
  std::string model;
  ErrorMetric metric = ErrorMetric::sup_norm;
  std::vector<MonteCarloRow> rows;
  std::vector<MonteCarloCell> cells;

  std::string results_csv() const;
  std::string summary_csv() const;
};

//! Seed of replication `rep` at sample size `n`.
std::uint64_t cell_seed(std::uint64_t base, std::size_t n, std::size_t rep);

//! Error of one replication; throws whatever the pipeline throws.
double run_replication(const MonteCarloPlan& plan, std::size_t n, std::size_t rep);

//! Distributes cells over worker threads; merged by cell index.
MonteCarloResults run_monte_carlo(const MonteCarloPlan& plan);

} // namespace trafoid
