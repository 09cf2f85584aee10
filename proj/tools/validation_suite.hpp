#pragma once

#include <cstdint>

#include "rbl/config.hpp"

namespace rbl {

struct ValidationReport {
  int passed{0};
  int failed{0};
  int recorded{0};  // informational entries without a pass/fail verdict
};

/// Runs the self-validation suites: the rank-one FIM assembly against the
/// element-centric Monte Carlo construction, the analytic gradients against
/// finite differences, and the closed-form intensities against mc_fisher.
/// Prints one line per check to stdout.
ValidationReport run_validation(const ScenarioConfig& config,
                                std::uint64_t seed, int threads);

}  // namespace rbl
