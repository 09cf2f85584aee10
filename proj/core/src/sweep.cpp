#include "rbl/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <nlohmann/json.hpp>

#include "rbl/parallel.hpp"

namespace rbl {

namespace {

using nlohmann::json;

void require_sweep(const ScenarioConfig& config) {
  config.validate();
  if (config.sweep_parameter.empty()) {
    throw Error(ErrorCode::ValidationError,
                "sweep: a sweep axis is required for bound/simulate runs");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string flags_token(const BoundReport& report) {
  std::string flags;
  if (report.pseudo_inverse_used) flags += "pinv";
  if (report.rank_deficient) flags += flags.empty() ? "rankdef" : "|rankdef";
  return flags.empty() ? "-" : flags;
}

void append_bound_fields(std::string& out, const BoundRow& row) {
  out += fmt(row.sweep_value);
  out += ',';
  out += fmt(row.report.crlb_t);
  out += ',';
  out += fmt(row.report.crlb_t_approx);
  out += ',';
  out += fmt(row.report.crlb_q);
  out += ',';
  out += fmt(row.report.crlb_q_approx);
  out += ',';
  out += fmt(row.report.ccrb_q);
  out += ',';
  out += fmt(row.report.cond_ft);
  out += ',';
  out += fmt(row.report.cond_fq);
  out += ',';
  out += flags_token(row.report);
}

json bound_fields_json(const BoundRow& row) {
  json node;
  node["sweep_value"] = row.sweep_value;
  node["crlb_t"] = row.report.crlb_t;
  node["crlb_t_approx"] = row.report.crlb_t_approx;
  node["crlb_Q"] = row.report.crlb_q;
  node["crlb_Q_approx"] = row.report.crlb_q_approx;
  node["ccrb_Q"] = row.report.ccrb_q;
  node["cond_Ft"] = row.report.cond_ft;
  node["cond_FQ"] = row.report.cond_fq;
  node["flags"] = flags_token(row.report);
  return node;
}

template <typename Row, typename Getter>
json slope_entry(const std::vector<Row>& rows, Getter&& get) {
  std::vector<double> x, y;
  for (const auto& row : rows) {
    x.push_back(row.sweep_value);
    y.push_back(get(row));
  }
  const double slope = loglog_slope(x, y);
  if (std::isnan(slope)) return nullptr;
  return slope;
}

template <typename Row>
json bound_diagnostics(const std::vector<Row>& rows) {
  json diag;
  diag["slope_crlb_t"] =
      slope_entry(rows, [](const Row& r) { return r.report.crlb_t; });
  diag["slope_crlb_t_approx"] =
      slope_entry(rows, [](const Row& r) { return r.report.crlb_t_approx; });
  diag["slope_crlb_Q"] =
      slope_entry(rows, [](const Row& r) { return r.report.crlb_q; });
  diag["slope_crlb_Q_approx"] =
      slope_entry(rows, [](const Row& r) { return r.report.crlb_q_approx; });
  diag["slope_ccrb_Q"] =
      slope_entry(rows, [](const Row& r) { return r.report.ccrb_q; });
  return diag;
}

}  // namespace

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

std::vector<BoundRow> run_bound_sweep(const ScenarioConfig& config) {
  require_sweep(config);
  std::vector<BoundRow> rows;
  rows.reserve(config.sweep_values.size());
  for (double value : config.sweep_values) {
    const Scenario scenario = build_scenario(config, value);
    BoundRow row;
    row.sweep_value = value;
    row.report =
        evaluate_bounds(fim_translation(scenario), fim_rotation(scenario),
                        scenario.pose.rotation.matrix());
    rows.push_back(row);
  }
  return rows;
}

std::vector<SimulateRow> run_simulate_sweep(const ScenarioConfig& config,
                                            int threads) {
  require_sweep(config);
  if (config.trials < 1) {
    throw Error(ErrorCode::ValidationError, "trials: must be >= 1");
  }
  std::vector<SimulateRow> rows;
  rows.reserve(config.sweep_values.size());
  for (std::size_t i = 0; i < config.sweep_values.size(); ++i) {
    const double value = config.sweep_values[i];
    const Scenario scenario = build_scenario(config, value);
    MonteCarloOptions mc;
    mc.n_trials = config.trials;
    std::uint64_t state = config.seed + i;
    mc.seed = splitmix64(state);  // independent stream per grid point
    mc.threads = threads;
    mc.estimators = config.resolved_estimators();
    const MonteCarloSummary summary = run_monte_carlo(scenario, mc);
    SimulateRow row;
    row.sweep_value = value;
    row.report = summary.bounds;
    row.stats = summary.stats;
    rows.push_back(row);
  }
  return rows;
}

std::string bound_csv(const std::vector<BoundRow>& rows) {
  std::string out =
      "sweep_value,crlb_t,crlb_t_approx,crlb_Q,crlb_Q_approx,ccrb_Q,"
      "cond_Ft,cond_FQ,flags\n";
  for (const auto& row : rows) {
    append_bound_fields(out, row);
    out += '\n';
  }
  return out;
}

std::string simulate_csv(const std::vector<SimulateRow>& rows,
                         const std::vector<Estimator>& estimators) {
  std::string out =
      "sweep_value,crlb_t,crlb_t_approx,crlb_Q,crlb_Q_approx,ccrb_Q,"
      "cond_Ft,cond_FQ,flags";
  for (Estimator est : estimators) {
    const std::string name = to_string(est);
    out += ",mse_t_" + name + ",se_t_" + name + ",mse_Q_" + name + ",se_Q_" +
           name + ",fail_rate_" + name;
  }
  out += '\n';
  for (const auto& row : rows) {
    BoundRow base{row.sweep_value, row.report};
    append_bound_fields(out, base);
    for (const auto& [est, stats] : row.stats) {
      out += ',';
      out += fmt(stats.mse_t);
      out += ',';
      out += fmt(stats.se_t);
      out += ',';
      out += fmt(stats.mse_q);
      out += ',';
      out += fmt(stats.se_q);
      out += ',';
      out += fmt(stats.fail_rate);
    }
    out += '\n';
  }
  return out;
}

std::string bound_json(const std::vector<BoundRow>& rows) {
  json root;
  root["mode"] = "bound";
  root["rows"] = json::array();
  for (const auto& row : rows) root["rows"].push_back(bound_fields_json(row));
  root["diagnostics"] = bound_diagnostics(rows);
  return root.dump(2) + "\n";
}

std::string simulate_json(const std::vector<SimulateRow>& rows,
                          const std::vector<Estimator>& estimators) {
  json root;
  root["mode"] = "simulate";
  root["rows"] = json::array();
  for (const auto& row : rows) {
    BoundRow base{row.sweep_value, row.report};
    json node = bound_fields_json(base);
    for (const auto& [est, stats] : row.stats) {
      const std::string name = to_string(est);
      node["mse_t_" + name] = stats.mse_t;
      node["se_t_" + name] = stats.se_t;
      node["mse_Q_" + name] = stats.mse_q;
      node["se_Q_" + name] = stats.se_q;
      node["fail_rate_" + name] = stats.fail_rate;
    }
    root["rows"].push_back(node);
  }
  json diag = bound_diagnostics(rows);
  for (Estimator est : estimators) {
    const std::string name = to_string(est);
    diag["slope_mse_t_" + name] =
        slope_entry(rows, [&](const SimulateRow& r) {
          for (const auto& [e, s] : r.stats) {
            if (e == est) return s.mse_t;
          }
          return std::numeric_limits<double>::quiet_NaN();
        });
    diag["slope_mse_Q_" + name] =
        slope_entry(rows, [&](const SimulateRow& r) {
          for (const auto& [e, s] : r.stats) {
            if (e == est) return s.mse_q;
          }
          return std::numeric_limits<double>::quiet_NaN();
        });
  }
  root["diagnostics"] = diag;
  return root.dump(2) + "\n";
}

}  // namespace rbl
