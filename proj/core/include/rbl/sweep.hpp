#pragma once

#include "rbl/config.hpp"

namespace rbl {

struct BoundRow {
  double sweep_value{0.0};
  BoundReport report;
};

struct SimulateRow {
  double sweep_value{0.0};
  BoundReport report;
  std::vector<std::pair<Estimator, EstimatorStats>> stats;
};

/// Bounds at every sweep grid point. Requires a sweep axis in the config.
std::vector<BoundRow> run_bound_sweep(const ScenarioConfig& config);

/// Bounds plus Monte Carlo MSEs of the configured estimators at every grid
/// point. Each point draws from an independent stream derived from the
/// config seed, so rows are reproducible individually.
std::vector<SimulateRow> run_simulate_sweep(const ScenarioConfig& config,
                                            int threads);

std::string bound_csv(const std::vector<BoundRow>& rows);
std::string simulate_csv(const std::vector<SimulateRow>& rows,
                         const std::vector<Estimator>& estimators);

/// JSON emission also carries log-log slope diagnostics of every bound (and
/// MSE) column against the sweep value.
std::string bound_json(const std::vector<BoundRow>& rows);
std::string simulate_json(const std::vector<SimulateRow>& rows,
                          const std::vector<Estimator>& estimators);

/// Least-squares slope of log(y) against log(x); NaN unless all points are
/// positive and at least two are given.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rbl
