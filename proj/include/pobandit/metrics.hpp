#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pobandit {

/// Per-arm diagnostics after t completed rounds.
struct Checkpoint {
  std::size_t t = 0;
  std::vector<std::size_t> pulls;      // n_i(t)
  std::vector<double> est_error;       // ||eta_hat_i(t) - eta_i||
  std::vector<double> min_eig;         // lambda_min(B_i(t))
};

struct RunTrace {
  std::string policy;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t num_arms = 0;

  // Indexed by step t-1.
  std::vector<double> gaps;
  std::vector<double> cumulative_regret;
  std::vector<std::uint32_t> chosen;
  std::vector<std::uint32_t> optimal;
  std::vector<std::uint8_t> correct;  // real-data mode only: chosen == label

  std::vector<Checkpoint> checkpoints;
  std::vector<double> p_hat;  // from the run's margin estimate, if computed
  double kappa_hat = 0.0;

  std::size_t horizon() const { return gaps.size(); }
  double regret(std::size_t t) const;
  const Checkpoint* checkpoint_at(std::size_t t) const;
};

/// Geometric grid {1, 2, 4, ...} plus multiples of `every` (if nonzero),
/// plus the horizon itself. Sorted, unique, within [1, horizon].
std::vector<std::size_t> checkpoint_grid(std::size_t horizon, std::size_t every = 0);

/// Regret(t) / (log t)^2, defined for 3 <= t <= horizon.
double normalized_regret(const RunTrace& trace, std::size_t t);

/// sqrt(t) * ||eta_hat_arm(t) - eta_arm||; t must be a checkpoint.
double normalized_estimation_error(const RunTrace& trace, std::size_t arm, std::size_t t);

/// flag_i = n_i(t) >= p_i t / 4 for arms with p_i above `floor`; nullopt for
/// excluded arms.
std::vector<std::optional<bool>> arm_count_check(const RunTrace& trace, std::span<const double> p_hat,
                                                 std::size_t t, double floor = 0.05);

/// lambda_min(B_arm(t)) / n_arm(t); nullopt while the arm is unpulled.
std::optional<double> eigen_growth_check(const RunTrace& trace, std::size_t arm, std::size_t t);

/// t^{-1} sum_{tau <= t} 1(a(tau) = l(tau)).
double correct_decision_rate(const RunTrace& trace, std::size_t t);

struct AggregateCurves {
  std::vector<std::size_t> t;
  std::vector<double> mean;
  std::vector<double> worst;           // pointwise max over runs
  std::vector<std::size_t> counts;     // runs contributing at each point
  std::size_t runs = 0;
};

/// Value of a curve for one trace at time t, or nullopt to skip that trace there.
using CurveSelector = std::function<std::optional<double>(const RunTrace&, std::size_t)>;

/// Pointwise mean and max over traces. Result is independent of trace order.
AggregateCurves aggregate(std::span<const RunTrace> traces, std::span<const std::size_t> grid,
                          const CurveSelector& select);

}  // namespace pobandit
