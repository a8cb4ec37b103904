#include "pobandit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

#include "pobandit/emit.hpp"
#include "pobandit/errors.hpp"
#include "pobandit/harness.hpp"
#include "pobandit/policy.hpp"

namespace pobandit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::filesystem::path data_dir(const VerifyOptions& opts) {
  return opts.data_dir.empty() ? std::filesystem::path(POBANDIT_DATA_DIR) : opts.data_dir;
}

// Random observation model with small random dimensions.
Environment random_small_model(RandomStream& rng) {
  ScenarioShape shape;
  shape.d_x = 1 + rng.uniform_index(8);
  shape.d_y = 1 + rng.uniform_index(8);
  shape.num_arms = 2;
  shape.sensing_noise = 0.05 + 2.0 * rng.uniform();
  return random_scenario(shape, rng);
}

}  // namespace

ScenarioSpec long_run_spec(const VerifyOptions& opts) {
  ScenarioSpec s;
  s.name = "acceptance_long_run";
  s.d_x = 10;
  s.d_y = 10;
  s.num_arms = 5;
  s.horizon = opts.quick ? 4000 : 20000;
  s.runs = opts.quick ? 8 : 50;
  s.checkpoint_every = s.horizon / 20;
  s.policies = {"ts"};
  s.base_seed = 20240601;
  s.margin_samples = 20000;
  s.workers = opts.workers;
  return s;
}

ScenarioSpec greedy_comparison_spec(const VerifyOptions& opts) {
  ScenarioSpec s;
  s.name = "acceptance_greedy_vs_ts";
  s.d_x = 10;
  s.d_y = 10;
  s.num_arms = 20;
  s.horizon = opts.quick ? 4000 : 20000;
  s.runs = opts.quick ? 8 : 50;
  s.checkpoint_every = s.horizon / 20;
  s.policies = {"ts", "greedy"};
  s.base_seed = 20240602;
  s.margin_samples = 0;
  s.workers = opts.workers;
  return s;
}

ScenarioSpec real_data_spec(const VerifyOptions& opts) {
  ScenarioSpec s;
  s.name = "acceptance_real_data";
  s.dataset_path = data_dir(opts) / "egg_standin.csv";
  s.label_column = "label";
  s.reward_mode = RewardMode::logistic;
  s.d_y = 10;
  s.horizon = 5000;
  s.runs = opts.quick ? 5 : 20;
  s.checkpoint_every = 500;
  s.policies = {"ts", "regression_oracle"};
  s.base_seed = 20240603;
  s.margin_samples = 0;
  s.workers = opts.workers;
  return s;
}

CheckResult check_posterior_equivalence(const VerifyOptions&) {
  const auto start = Clock::now();
  constexpr std::size_t kSequences = 20, kArms = 3, kDim = 5, kSteps = 1000;
  double worst = 0.0;
  for (std::size_t seq = 0; seq < kSequences; ++seq) {
    RandomStream rng(derive_seed(77, {seq}));
    PosteriorState state = ts_init(kArms, kDim, 1.0);
    std::vector<Pull> history;
    for (std::size_t s = 0; s < kSteps; ++s) {
      Pull p{rng.uniform_index(kArms), Vector(kDim), 0.0};
      rng.fill_normal(p.y.values());
      p.reward = 3.0 * rng.normal();
      ts_update(state, p.arm, p.y, p.reward);
      history.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < kArms; ++i) {
      const auto batch = closed_form_posterior(history, i, kDim);
      worst = std::max(worst, max_relative_deviation(state.arm(i).precision.entries(), batch.precision.entries()));
      worst = std::max(worst, max_relative_deviation(state.arm(i).eta_hat, batch.eta_hat));
    }
  }
  return {1, "posterior recursion matches closed form", worst <= 1e-8,
          fmt("max relative deviation %.3e (threshold 1e-8)", worst), seconds_since(start)};
}

CheckResult check_blup(const VerifyOptions& opts) {
  const auto start = Clock::now();
  RandomStream rng(derive_seed(78, {}));
  double worst = 0.0;
  for (int m = 0; m < 200; ++m) {
    const Environment env = random_small_model(rng);
    const auto& o = env.observation;
    worst = std::max(worst, max_relative_deviation(o.blup, build_blup_gain_form(o.sensing, o.context_cov, o.noise_cov)));
  }
  const bool identity_ok = worst <= 1e-8;

  // Monte Carlo: b = D^T mu beats every perturbed predictor b + eps u.
  const std::size_t samples = opts.quick ? 20000 : 100000;
  int violations = 0, comparisons = 0;
  double tightest = INFINITY;
  for (int m = 0; m < 10; ++m) {
    ScenarioShape shape;
    shape.d_x = 3 + m % 4;
    shape.d_y = 2 + m % 5;
    shape.num_arms = 1;
    const Environment env = random_scenario(shape, rng);
    const Vector& mu = env.arms.mu[0];
    const Vector& b = env.arms.eta[0];
    std::vector<Vector> competitors;
    for (int k = 0; k < 8; ++k) {
      Vector u(b.dim());
      rng.fill_normal(u.values());
      competitors.push_back(b + (0.05 / norm(u)) * u);
    }
    std::vector<double> sum(8, 0.0), sum_sq(8, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
      const Round r = sample_round(env, s, rng);
      const double target = dot(r.x[0], mu);
      const double e0 = target - dot(r.y[0], b);
      for (int k = 0; k < 8; ++k) {
        const double ek = target - dot(r.y[0], competitors[k]);
        const double d = e0 * e0 - ek * ek;
        sum[k] += d;
        sum_sq[k] += d * d;
      }
    }
    for (int k = 0; k < 8; ++k) {
      const double n = static_cast<double>(samples);
      const double mean = sum[k] / n;
      const double se = std::sqrt(std::max(0.0, sum_sq[k] / n - mean * mean) / n);
      ++comparisons;
      if (mean > 2.0 * se) ++violations;
      tightest = std::min(tightest, (2.0 * se - mean) / std::max(se, 1e-300));
    }
  }
  return {2, "BLUP closed forms agree and minimize prediction MSE", identity_ok && violations == 0,
          fmt("identity max dev %.3e (<=1e-8); MC violations %d/%d (2 SE rule)", worst, violations, comparisons),
          seconds_since(start)};
}

std::vector<CheckResult> check_long_run(const VerifyOptions& opts) {
  const auto start = Clock::now();
  const ScenarioSpec spec = long_run_spec(opts);
  const ExperimentReport report = run_experiment(spec);
  const auto& runs = report.traces.front();
  const std::size_t T = spec.horizon;
  const double run_seconds = seconds_since(start);
  std::vector<CheckResult> out;

  // 3: flat normalized estimation error over [T/2, T].
  {
    bool ok = true;
    double worst_ratio = 0.0;
    std::size_t arms_checked = 0;
    for (std::size_t i = 0; i < spec.num_arms; ++i) {
      std::vector<double> values;
      double at_half = NAN;
      for (std::size_t t : report.grid) {
        if (t < T / 2) continue;
        double sum = 0.0;
        std::size_t count = 0;
        for (const RunTrace& tr : runs)
          if (tr.p_hat[i] > 0.05) {
            sum += normalized_estimation_error(tr, i, t);
            ++count;
          }
        if (count == 0) continue;
        values.push_back(sum / static_cast<double>(count));
        if (t == T / 2) at_half = values.back();
      }
      if (values.empty()) continue;
      ++arms_checked;
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      const double ratio = mean / at_half;
      worst_ratio = std::max(worst_ratio, ratio);
      if (!(ratio <= 1.5)) ok = false;
    }
    out.push_back({3, "normalized estimation error flat on [T/2, T]", ok && arms_checked > 0,
                   fmt("worst mean/at(T/2) ratio %.3f over %zu arms (threshold 1.5)", worst_ratio, arms_checked),
                   run_seconds});
  }

  // 4: bounded growth of Regret(t) / log^2 t.
  {
    double at_quarter = 0.0, at_end = 0.0;
    for (const RunTrace& tr : runs) {
      at_quarter += normalized_regret(tr, T / 4);
      at_end += normalized_regret(tr, T);
    }
    at_quarter /= static_cast<double>(runs.size());
    at_end /= static_cast<double>(runs.size());
    const double ratio = at_end / at_quarter;
    out.push_back({4, "Regret(t)/log^2 t bounded growth", ratio <= 2.0,
                   fmt("mean at T %.4f, at T/4 %.4f, ratio %.3f (threshold 2)", at_end, at_quarter, ratio), 0.0});
  }

  // 6: n_i(T) >= p_i T / 4.
  {
    std::size_t pairs = 0, hits = 0;
    for (const RunTrace& tr : runs)
      for (const auto& flag : arm_count_check(tr, tr.p_hat, T))
        if (flag) {
          ++pairs;
          hits += *flag ? 1 : 0;
        }
    const double frac = pairs ? static_cast<double>(hits) / pairs : 0.0;
    out.push_back({6, "arm counts n_i(T) >= p_i T/4", pairs > 0 && frac >= 0.9,
                   fmt("%zu/%zu (run, arm) pairs = %.3f (threshold 0.9)", hits, pairs, frac), 0.0});
  }

  // 7: lambda_min(B_i(T)) / n_i(T) >= lambda_min(Sigma_xi) / 2.
  {
    std::size_t pairs = 0, hits = 0;
    double worst = INFINITY;
    for (const RunTrace& tr : runs) {
      const Environment env = scenario_for_run(spec, tr.run);
      const double lam = min_eigenvalue(env.observation.noise_cov);
      const Checkpoint* c = tr.checkpoint_at(T);
      for (std::size_t i = 0; i < spec.num_arms; ++i) {
        if (c->pulls[i] < 200) continue;
        ++pairs;
        const double ratio = *eigen_growth_check(tr, i, T) / lam;
        worst = std::min(worst, ratio);
        if (ratio >= 0.5) ++hits;
      }
    }
    const double frac = pairs ? static_cast<double>(hits) / pairs : 0.0;
    out.push_back({7, "lambda_min(B_i)/n_i >= lambda_min(Sigma_xi)/2", pairs > 0 && frac >= 0.9,
                   fmt("%zu/%zu pairs = %.3f (threshold 0.9); smallest ratio/lambda_min %.3f", hits, pairs, frac,
                       worst),
                   0.0});
  }
  return out;
}

CheckResult check_greedy_vs_ts(const VerifyOptions& opts) {
  const auto start = Clock::now();
  const ScenarioSpec spec = greedy_comparison_spec(opts);
  const ExperimentReport report = run_experiment(spec);
  const std::size_t T = spec.horizon;
  double worst_ts = 0.0, worst_greedy = 0.0, mean_ts = 0.0, mean_greedy = 0.0;
  for (const RunTrace& tr : report.traces[0]) {
    worst_ts = std::max(worst_ts, tr.regret(T));
    mean_ts += tr.regret(T) / spec.runs;
  }
  for (const RunTrace& tr : report.traces[1]) {
    worst_greedy = std::max(worst_greedy, tr.regret(T));
    mean_greedy += tr.regret(T) / spec.runs;
  }
  const double factor = worst_greedy / worst_ts;
  return {5, "Greedy worst-case regret >= 2x Thompson sampling", factor >= 2.0,
          fmt("worst at T: greedy %.1f, ts %.1f, factor %.2f (threshold 2); means %.1f vs %.1f", worst_greedy,
              worst_ts, factor, mean_greedy, mean_ts),
          seconds_since(start)};
}

CheckResult check_residual_structure(const VerifyOptions& opts) {
  const auto start = Clock::now();
  ScenarioShape shape;
  shape.d_x = 8;
  shape.d_y = 6;
  shape.num_arms = 5;
  RandomStream rng(derive_seed(79, {}));
  const Environment env = random_scenario(shape, rng);
  const std::size_t rounds = (opts.quick ? 20000 : 100000) / shape.num_arms;
  const std::size_t d = shape.d_y;
  std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
  std::size_t n = 0;
  for (std::size_t t = 1; t <= rounds; ++t) {
    const Round r = sample_round(env, t, rng);
    for (std::size_t i = 0; i < env.num_arms(); ++i) {
      const double zeta = realize_reward(env, i, r, rng) - dot(r.y[i], env.arms.eta[i]);
      for (std::size_t j = 0; j < d; ++j) {
        const double v = zeta * r.y[i][j];
        sum[j] += v;
        sum_sq[j] += v * v;
      }
      ++n;
    }
  }
  double worst_z = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
    worst_z = std::max(worst_z, std::abs(mean) / se);
  }
  return {8, "reward residual uncorrelated with observation", worst_z <= 4.0,
          fmt("max |mean(zeta*y_j)|/SE %.3f over %zu pairs (threshold 4)", worst_z, n), seconds_since(start)};
}

CheckResult check_real_data(const VerifyOptions& opts) {
  const auto start = Clock::now();
  const ScenarioSpec spec = real_data_spec(opts);
  const ExperimentReport report = run_experiment(spec);
  const std::size_t T = spec.horizon;
  double ts = 0.0, oracle = 0.0;
  for (const RunTrace& tr : report.traces[0]) ts += correct_decision_rate(tr, T) / spec.runs;
  for (const RunTrace& tr : report.traces[1]) oracle += correct_decision_rate(tr, T) / spec.runs;
  const double diff = std::abs(ts - oracle);
  return {9, "real-data correct decision rate near regression oracle", diff <= 0.05,
          fmt("TS %.4f vs oracle %.4f at t=%zu, |diff| %.4f (threshold 0.05)", ts, oracle, T, diff),
          seconds_since(start)};
}

CheckResult check_determinism(const VerifyOptions& opts) {
  const auto start = Clock::now();
  ScenarioSpec spec;
  spec.name = "determinism";
  spec.d_x = 6;
  spec.d_y = 4;
  spec.num_arms = 4;
  spec.horizon = 2000;
  spec.runs = 4;
  spec.checkpoint_every = 250;
  spec.policies = {"ts", "greedy"};
  spec.margin_samples = 2000;
  spec.base_seed = 4242;

  const auto root = opts.scratch_dir.empty()
                        ? std::filesystem::temp_directory_path() / ("pobandit_determinism_" + std::to_string(::getpid()))
                        : opts.scratch_dir;
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  bool same = true;
  std::string detail;
  std::vector<std::string> first;
  for (std::size_t workers : {1, 3}) {
    ScenarioSpec s = spec;
    s.workers = workers;
    const auto files = emit(run_experiment(s), root / ("w" + std::to_string(workers)), false);
    const std::vector<std::string> contents = {slurp(files.curves_csv), slurp(files.runs_csv)};
    if (first.empty()) first = contents;
    else same = same && contents == first;
  }
  const std::size_t bytes = first.empty() ? 0 : first[0].size() + first[1].size();
  std::filesystem::remove_all(root);
  return {10, "identical config and seed give byte-identical CSV", same && bytes > 0,
          fmt("%zu bytes compared across two runs (1 and 3 workers): %s", bytes, same ? "identical" : "DIFFERENT"),
          seconds_since(start)};
}

std::vector<CheckResult> run_acceptance(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  out.push_back(check_posterior_equivalence(opts));
  out.push_back(check_blup(opts));
  for (auto& r : check_long_run(opts)) out.push_back(std::move(r));
  out.push_back(check_greedy_vs_ts(opts));
  out.push_back(check_residual_structure(opts));
  out.push_back(check_real_data(opts));
  out.push_back(check_determinism(opts));
  std::sort(out.begin(), out.end(), [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });
  return out;
}

std::string format_result(const CheckResult& r) {
  return fmt("[%s] criterion %2d: %s -- %s (%.1f s)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
             r.measured.c_str(), r.seconds);
}

}  // namespace pobandit
