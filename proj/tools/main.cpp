#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rbl/sweep.hpp"
#include "validation_suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int error_exit_code(const rbl::Error& e) {
  switch (e.code()) {
    case rbl::ErrorCode::ParseError:
    case rbl::ErrorCode::ValidationError:
    case rbl::ErrorCode::InvalidParameter:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format{"csv"};
  std::optional<std::uint64_t> seed;
  int threads{0};
};

rbl::ScenarioConfig load_config(const CommonOpts& opts, bool required) {
  rbl::ScenarioConfig config;
  if (!opts.config_path.empty()) {
    config = rbl::parse_config(opts.config_path);
  } else if (required) {
    throw rbl::Error(rbl::ErrorCode::ValidationError,
                     "--config is required for this subcommand");
  } else {
    config = rbl::default_config();
  }
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

void write_output(const std::string& out_path, const std::string& payload) {
  if (out_path.empty() || out_path == "-") {
    std::fputs(payload.c_str(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw rbl::Error(rbl::ErrorCode::ValidationError,
                     "cannot open output file " + out_path);
  }
  out << payload;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_output) {
  cmd->add_option("--config", opts.config_path, "Scenario config file");
  cmd->add_option("--seed", opts.seed, "Override the config master seed");
  cmd->add_option("--threads", opts.threads,
                  "Worker threads (0 = hardware concurrency)");
  if (with_output) {
    cmd->add_option("--out", opts.out_path, "Output path (default stdout)");
    cmd->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose estimation bounds for rigid bodies: exact, approximate "
               "and SO(3)-constrained, with Monte Carlo validation"};
  app.require_subcommand(1);

  CommonOpts bound_opts, sim_opts, val_opts;
  CLI::App* bound = app.add_subcommand(
      "bound", "Sweep the noise grid and emit the bound table");
  add_common(bound, bound_opts, true);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Bound table plus Monte Carlo estimator MSEs");
  add_common(simulate, sim_opts, true);
  CLI::App* validate = app.add_subcommand(
      "validate", "Run the internal oracle suites and report pass/fail");
  add_common(validate, val_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) {
      const rbl::ScenarioConfig config = load_config(bound_opts, true);
      const auto rows = rbl::run_bound_sweep(config);
      write_output(bound_opts.out_path, bound_opts.format == "json"
                                            ? rbl::bound_json(rows)
                                            : rbl::bound_csv(rows));
      return kExitOk;
    }
    if (simulate->parsed()) {
      const rbl::ScenarioConfig config = load_config(sim_opts, true);
      const auto rows = rbl::run_simulate_sweep(config, sim_opts.threads);
      write_output(sim_opts.out_path,
                   sim_opts.format == "json"
                       ? rbl::simulate_json(rows, config.resolved_estimators())
                       : rbl::simulate_csv(rows, config.resolved_estimators()));
      return kExitOk;
    }
    if (validate->parsed()) {
      const rbl::ScenarioConfig config = load_config(val_opts, false);
      const rbl::ValidationReport report =
          rbl::run_validation(config, config.seed, val_opts.threads);
      return report.failed == 0 ? kExitOk : kExitValidation;
    }
  } catch (const rbl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
