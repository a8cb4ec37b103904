#pragma once

// Acceptance checks: each runs a fixed, seeded experiment and compares a
// measured statistic against a pinned threshold.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pobandit/config.hpp"

namespace pobandit {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  double seconds = 0.0;
};

struct VerifyOptions {
  bool quick = false;       // smaller runs/horizons; thresholds unchanged
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::filesystem::path scratch_dir;  // for the determinism check; temp dir if empty
  std::filesystem::path data_dir;     // bundled datasets; compiled-in default if empty
};

/// Scenario shared by the estimation-rate, regret-rate, arm-count and
/// eigenvalue checks.
ScenarioSpec long_run_spec(const VerifyOptions& opts);
/// Thompson sampling vs Greedy comparison scenario.
ScenarioSpec greedy_comparison_spec(const VerifyOptions& opts);
/// Real-data protocol scenario on the bundled two-class stand-in.
ScenarioSpec real_data_spec(const VerifyOptions& opts);

CheckResult check_posterior_equivalence(const VerifyOptions& opts);
CheckResult check_blup(const VerifyOptions& opts);
/// Checks 3, 4, 6 and 7 share one long-run experiment.
std::vector<CheckResult> check_long_run(const VerifyOptions& opts);
CheckResult check_greedy_vs_ts(const VerifyOptions& opts);
CheckResult check_residual_structure(const VerifyOptions& opts);
CheckResult check_real_data(const VerifyOptions& opts);
CheckResult check_determinism(const VerifyOptions& opts);

/// Every check, ordered by id.
std::vector<CheckResult> run_acceptance(const VerifyOptions& opts);

std::string format_result(const CheckResult& r);

}  // namespace pobandit
