#pragma once

// Experiment orchestration: seeded single runs, parallel replications and
// cross-run aggregation into named series.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pobandit/config.hpp"
#include "pobandit/datasets.hpp"
#include "pobandit/metrics.hpp"
#include "pobandit/model.hpp"
#include "pobandit/policy.hpp"

namespace pobandit {

/// Substream purposes. A run's randomness is keyed by (run seed, purpose, t).
enum class Purpose : std::uint64_t {
  scenario = 1,
  round = 2,
  reward = 3,
  policy = 4,
  margin = 5,
  sensing = 6,
  hindsight = 7,
  stream = 8,
};

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run);
RandomStream purpose_stream(std::uint64_t seed, Purpose purpose);
RandomStream step_stream(std::uint64_t seed, Purpose purpose, std::size_t t);

/// The environment used by a run (per-run unless spec.fixed_scenario).
Environment scenario_for_run(const ScenarioSpec& spec, std::size_t run);

std::unique_ptr<Policy> make_policy(const std::string& name, const Environment& env, double dispersion);

/// Executes the full interaction protocol for one (policy, run).
RunTrace run_single(const ScenarioSpec& spec, const std::string& policy, std::size_t run);

/// Shared real-data inputs: the loaded dataset and its synthesized rewards.
struct RealDataContext {
  LabeledDataset data;
  RewardSynthesis synthesis;

  static RealDataContext load(const ScenarioSpec& spec);
};

RunTrace run_single_real(const ScenarioSpec& spec, const RealDataContext& ctx, const std::string& policy,
                         std::size_t run);

struct SeriesCurve {
  std::string policy;
  std::string series;
  AggregateCurves curves;
};

/// Pass counts at t = T for the arm-count and eigenvalue lemmas (synthetic
/// mode). Arm-count pairs need p_hat_i > 0.05; eigenvalue pairs need n_i >= 200.
struct TheoremSummary {
  std::string policy;
  std::size_t arm_count_pairs = 0;
  std::size_t arm_count_pass = 0;
  std::size_t eigen_pairs = 0;
  std::size_t eigen_pass = 0;
};

std::vector<TheoremSummary> summarize_theorems(const ScenarioSpec& spec, const std::vector<std::string>& policies,
                                               const std::vector<std::vector<RunTrace>>& traces);

struct ExperimentReport {
  ScenarioSpec spec;
  std::vector<std::string> policies;
  std::vector<std::vector<RunTrace>> traces;  // [policy][run], sorted by run
  std::vector<SeriesCurve> curves;
  std::vector<TheoremSummary> theorems;  // empty in real-data mode
  std::vector<std::uint64_t> seeds;  // per run
  std::vector<std::size_t> grid;
  double wall_seconds = 0.0;

  const SeriesCurve* find(const std::string& policy, const std::string& series) const;
};

/// Runs spec.runs replications of every policy on up to spec.workers threads
/// and aggregates. Output is independent of scheduling.
ExperimentReport run_experiment(const ScenarioSpec& spec);

/// Recomputes the aggregate series of a report from its traces.
std::vector<SeriesCurve> build_series(const ScenarioSpec& spec, const std::vector<std::string>& policies,
                                      const std::vector<std::vector<RunTrace>>& traces,
                                      const std::vector<std::size_t>& grid);

/// Bundled figure recipes (1-4). Desk-scale defaults; `runs`/`horizon`
/// override when nonzero.
std::vector<ScenarioSpec> figure_recipe(int figure, std::size_t runs = 0, std::size_t horizon = 0);

}  // namespace pobandit
