#include "pobandit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pobandit/errors.hpp"

namespace pobandit {

double RunTrace::regret(std::size_t t) const {
  if (t == 0) return 0.0;
  if (t > cumulative_regret.size()) throw Error(ErrorKind::InvalidArgument, "regret: t beyond horizon");
  return cumulative_regret[t - 1];
}

const Checkpoint* RunTrace::checkpoint_at(std::size_t t) const {
  auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), t,
                             [](const Checkpoint& c, std::size_t v) { return c.t < v; });
  return (it != checkpoints.end() && it->t == t) ? &*it : nullptr;
}

std::vector<std::size_t> checkpoint_grid(std::size_t horizon, std::size_t every) {
  std::vector<std::size_t> grid;
  for (std::size_t t = 1; t <= horizon; t *= 2) grid.push_back(t);
  if (every > 0)
    for (std::size_t t = every; t <= horizon; t += every) grid.push_back(t);
  if (horizon > 0) grid.push_back(horizon);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double normalized_regret(const RunTrace& trace, std::size_t t) {
  if (t < 3) throw Error(ErrorKind::InvalidArgument, "normalized regret needs t >= 3");
  const double l = std::log(static_cast<double>(t));
  return trace.regret(t) / (l * l);
}

namespace {

const Checkpoint& require_checkpoint(const RunTrace& trace, std::size_t t) {
  const Checkpoint* c = trace.checkpoint_at(t);
  if (!c) throw Error(ErrorKind::InvalidArgument, "no checkpoint at t=" + std::to_string(t));
  return *c;
}

}  // namespace

double normalized_estimation_error(const RunTrace& trace, std::size_t arm, std::size_t t) {
  const Checkpoint& c = require_checkpoint(trace, t);
  return std::sqrt(static_cast<double>(t)) * c.est_error.at(arm);
}

std::vector<std::optional<bool>> arm_count_check(const RunTrace& trace, std::span<const double> p_hat,
                                                 std::size_t t, double floor) {
  const Checkpoint& c = require_checkpoint(trace, t);
  if (p_hat.size() != c.pulls.size()) throw Error(ErrorKind::DimensionMismatch, "p_hat has wrong length");
  std::vector<std::optional<bool>> flags(p_hat.size());
  for (std::size_t i = 0; i < p_hat.size(); ++i)
    if (p_hat[i] > floor) flags[i] = static_cast<double>(c.pulls[i]) >= p_hat[i] * static_cast<double>(t) / 4.0;
  return flags;
}

std::optional<double> eigen_growth_check(const RunTrace& trace, std::size_t arm, std::size_t t) {
  const Checkpoint& c = require_checkpoint(trace, t);
  const std::size_t n = c.pulls.at(arm);
  if (n == 0) return std::nullopt;
  return c.min_eig.at(arm) / static_cast<double>(n);
}

double correct_decision_rate(const RunTrace& trace, std::size_t t) {
  if (t == 0 || t > trace.correct.size())
    throw Error(ErrorKind::InvalidArgument, "correct_decision_rate: t outside recorded decisions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < t; ++i) hits += trace.correct[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(t);
}

AggregateCurves aggregate(std::span<const RunTrace> traces, std::span<const std::size_t> grid,
                          const CurveSelector& select) {
  AggregateCurves out;
  out.runs = traces.size();
  std::vector<double> values;
  for (std::size_t t : grid) {
    values.clear();
    for (const RunTrace& tr : traces)
      if (auto v = select(tr, t)) values.push_back(*v);
    if (values.empty()) continue;
    // Sorted summation makes the mean bit-identical under run permutations.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.t.push_back(t);
    out.mean.push_back(std::clamp(sum / static_cast<double>(values.size()), values.front(), values.back()));
    out.worst.push_back(values.back());
    out.counts.push_back(values.size());
  }
  return out;
}

}  // namespace pobandit
