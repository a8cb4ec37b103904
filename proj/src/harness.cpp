#include "pobandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "pobandit/errors.hpp"

namespace pobandit {

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run) { return derive_seed(base_seed, {run}); }

RandomStream purpose_stream(std::uint64_t seed, Purpose purpose) {
  return RandomStream(derive_seed(seed, {static_cast<std::uint64_t>(purpose)}));
}

RandomStream step_stream(std::uint64_t seed, Purpose purpose, std::size_t t) {
  return RandomStream(derive_seed(seed, {static_cast<std::uint64_t>(purpose), t}));
}

Environment scenario_for_run(const ScenarioSpec& spec, std::size_t run) {
  const std::uint64_t key = spec.fixed_scenario ? spec.base_seed : run_seed(spec.base_seed, run);
  RandomStream rng = purpose_stream(key, Purpose::scenario);
  return random_scenario(spec.shape(), rng);
}

std::unique_ptr<Policy> make_policy(const std::string& name, const Environment& env, double dispersion) {
  const std::size_t n = env.num_arms();
  const std::size_t d = env.observation.observation_dim();
  const bool shared = env.arms.mode == ArmMode::shared_param;
  if (name == "ts") return std::make_unique<ThompsonPolicy>(n, d, dispersion, shared);
  if (name == "greedy") return std::make_unique<GreedyPolicy>(n, d, shared);
  if (name == "random") return std::make_unique<RandomPolicy>(n);
  if (name == "oracle") return std::make_unique<FixedParameterPolicy>(env.arms.eta, "oracle");
  throw Error(ErrorKind::InvalidConfig, "policy '" + name + "' is not available here");
}

namespace {

// Records per-arm diagnostics after t completed rounds.
Checkpoint make_checkpoint(std::size_t t, const std::vector<std::size_t>& pulls, const Policy& policy,
                           std::span<const Vector> eta_ref) {
  Checkpoint c;
  c.t = t;
  c.pulls = pulls;
  if (const PosteriorState* post = policy.posterior()) {
    for (std::size_t i = 0; i < pulls.size(); ++i) {
      const ArmPosterior& rec = post->arm(i);
      c.est_error.push_back(norm(rec.eta_hat - eta_ref[i]));
      c.min_eig.push_back(min_eigenvalue(rec.precision));
    }
  }
  return c;
}

void record_step(RunTrace& trace, std::size_t chosen, std::size_t optimal, double g) {
  trace.chosen.push_back(static_cast<std::uint32_t>(chosen));
  trace.optimal.push_back(static_cast<std::uint32_t>(optimal));
  trace.gaps.push_back(g);
  const double prev = trace.cumulative_regret.empty() ? 0.0 : trace.cumulative_regret.back();
  trace.cumulative_regret.push_back(prev + g);
}

}  // namespace

RunTrace run_single(const ScenarioSpec& spec, const std::string& policy_name, std::size_t run) {
  if (spec.real_data()) {
    const RealDataContext ctx = RealDataContext::load(spec);
    return run_single_real(spec, ctx, policy_name, run);
  }
  const std::uint64_t seed = run_seed(spec.base_seed, run);
  const Environment env = scenario_for_run(spec, run);

  RunTrace trace;
  trace.policy = policy_name;
  trace.run = run;
  trace.seed = seed;
  trace.num_arms = env.num_arms();
  if (spec.margin_samples > 0) {
    RandomStream mrng = purpose_stream(seed, Purpose::margin);
    const MarginEstimate m = estimate_margin(env, spec.margin_samples, mrng);
    trace.p_hat = m.p_hat;
    trace.kappa_hat = m.kappa_hat;
  }

  const double v = spec.dispersion > 0.0 ? spec.dispersion : default_dispersion(env);
  auto policy = make_policy(policy_name, env, v);
  const auto grid = checkpoint_grid(spec.horizon, spec.checkpoint_every);
  auto next_checkpoint = grid.begin();
  std::vector<std::size_t> pulls(env.num_arms(), 0);

  trace.gaps.reserve(spec.horizon);
  trace.cumulative_regret.reserve(spec.horizon);
  for (std::size_t t = 1; t <= spec.horizon; ++t) {
    RandomStream round_rng = step_stream(seed, Purpose::round, t);
    const Round round = sample_round(env, t, round_rng);
    RandomStream policy_rng = step_stream(seed, Purpose::policy, t);
    const PolicyDecision decision = policy->decide(PolicyView(round), policy_rng);
    const std::size_t a = decision.chosen;
    RandomStream reward_rng = step_stream(seed, Purpose::reward, t);
    const double r = realize_reward(env, a, round, reward_rng);
    policy->update(a, round.y[a], r);
    ++pulls[a];
    record_step(trace, a, round.optimal_arm, gap(round, env.arms.eta, a));
    if (next_checkpoint != grid.end() && *next_checkpoint == t) {
      trace.checkpoints.push_back(make_checkpoint(t, pulls, *policy, env.arms.eta));
      ++next_checkpoint;
    }
  }
  return trace;
}

RealDataContext RealDataContext::load(const ScenarioSpec& spec) {
  RealDataContext ctx{load_csv(spec.dataset_path, spec.label_column), {}};
  ctx.synthesis = fit_reward_params(ctx.data, spec.reward_mode, spec.reward_noise);
  return ctx;
}

RunTrace run_single_real(const ScenarioSpec& spec, const RealDataContext& ctx, const std::string& policy_name,
                         std::size_t run) {
  const std::uint64_t seed = run_seed(spec.base_seed, run);
  const LabeledDataset& data = ctx.data;
  const std::size_t arms = data.num_classes;

  RandomStream sensing_rng = purpose_stream(seed, Purpose::sensing);
  const DenseMatrix sensing = make_sensing(data.d_x, spec.d_y, sensing_rng);
  RandomStream hindsight_rng = purpose_stream(seed, Purpose::hindsight);
  const auto hindsight = hindsight_samples(data, ctx.synthesis, sensing, spec.obs_noise_variance, hindsight_rng);
  const std::vector<Vector> oracle_eta = regression_oracle_fit(hindsight);

  double v = spec.dispersion;
  if (!(v > 0.0)) {
    // Residual scale of the hindsight fit.
    double ss = 0.0;
    for (const auto& s : hindsight)
      for (std::size_t i = 0; i < arms; ++i) {
        const double e = s.reward[i] - dot(s.y[i], oracle_eta[i]);
        ss += e * e;
      }
    v = std::sqrt(ss / static_cast<double>(hindsight.size() * arms));
    if (!(v > 0.0)) v = 1.0;
  }

  std::unique_ptr<Policy> policy;
  if (policy_name == "ts") policy = std::make_unique<ThompsonPolicy>(arms, spec.d_y, v);
  else if (policy_name == "greedy") policy = std::make_unique<GreedyPolicy>(arms, spec.d_y);
  else if (policy_name == "random") policy = std::make_unique<RandomPolicy>(arms);
  else if (policy_name == "regression_oracle")
    policy = std::make_unique<FixedParameterPolicy>(oracle_eta, "regression_oracle");
  else throw Error(ErrorKind::InvalidConfig, "policy '" + policy_name + "' is not available in real-data mode");

  RunTrace trace;
  trace.policy = policy_name;
  trace.run = run;
  trace.seed = seed;
  trace.num_arms = arms;

  RoundStream stream(data, ctx.synthesis, sensing, spec.obs_noise_variance, purpose_stream(seed, Purpose::stream));
  const auto grid = checkpoint_grid(spec.horizon, spec.checkpoint_every);
  auto next_checkpoint = grid.begin();
  std::vector<std::size_t> pulls(arms, 0);
  for (std::size_t t = 1; t <= spec.horizon; ++t) {
    const LabeledRound lr = stream.next();
    const Round round = assemble_round(t, {}, lr.y, oracle_eta);
    RandomStream policy_rng = step_stream(seed, Purpose::policy, t);
    const std::size_t a = policy->decide(PolicyView(round), policy_rng).chosen;
    RandomStream reward_rng = step_stream(seed, Purpose::reward, t);
    const double r = stream.reward(lr, a, reward_rng);
    policy->update(a, round.y[a], r);
    ++pulls[a];
    record_step(trace, a, round.optimal_arm, gap(round, oracle_eta, a));
    trace.correct.push_back(a == lr.label ? 1 : 0);
    if (next_checkpoint != grid.end() && *next_checkpoint == t) {
      trace.checkpoints.push_back(make_checkpoint(t, pulls, *policy, oracle_eta));
      ++next_checkpoint;
    }
  }
  return trace;
}

const SeriesCurve* ExperimentReport::find(const std::string& policy, const std::string& series) const {
  for (const auto& c : curves)
    if (c.policy == policy && c.series == series) return &c;
  return nullptr;
}

std::vector<SeriesCurve> build_series(const ScenarioSpec& spec, const std::vector<std::string>& policies,
                                      const std::vector<std::vector<RunTrace>>& traces,
                                      const std::vector<std::size_t>& grid) {
  std::vector<SeriesCurve> out;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const auto& runs = traces[p];
    if (runs.empty()) continue;
    const std::size_t arms = runs.front().num_arms;
    const bool has_posterior = !runs.front().checkpoints.empty() && !runs.front().checkpoints.front().est_error.empty();
    auto add = [&](std::string series, const CurveSelector& sel) {
      out.push_back({policies[p], std::move(series), aggregate(runs, grid, sel)});
    };
    add("regret", [](const RunTrace& tr, std::size_t t) -> std::optional<double> { return tr.regret(t); });
    add("regret_norm", [](const RunTrace& tr, std::size_t t) -> std::optional<double> {
      if (t < 3) return std::nullopt;
      return normalized_regret(tr, t);
    });
    for (std::size_t i = 0; i < arms; ++i) {
      const std::string suffix = "_arm_" + std::to_string(i + 1);
      if (has_posterior) {
        add("err_norm" + suffix, [i, cutoff = spec.err_cutoff](const RunTrace& tr, std::size_t t) -> std::optional<double> {
          if (t < cutoff) return std::nullopt;
          // Arms that are rarely optimal in a run's scenario carry no rate information.
          if (!tr.p_hat.empty() && !(tr.p_hat[i] > 0.05)) return std::nullopt;
          return normalized_estimation_error(tr, i, t);
        });
      }
      add("n" + suffix, [i](const RunTrace& tr, std::size_t t) -> std::optional<double> {
        return static_cast<double>(tr.checkpoint_at(t)->pulls.at(i));
      });
      if (has_posterior)
        add("eig_ratio" + suffix, [i](const RunTrace& tr, std::size_t t) { return eigen_growth_check(tr, i, t); });
    }
    if (!runs.front().correct.empty())
      add("cdr", [](const RunTrace& tr, std::size_t t) -> std::optional<double> { return correct_decision_rate(tr, t); });
  }
  return out;
}

std::vector<TheoremSummary> summarize_theorems(const ScenarioSpec& spec, const std::vector<std::string>& policies,
                                               const std::vector<std::vector<RunTrace>>& traces) {
  std::vector<TheoremSummary> out;
  if (spec.real_data()) return out;
  std::vector<double> noise_floor(spec.runs);
  for (std::size_t k = 0; k < spec.runs; ++k)
    noise_floor[k] = min_eigenvalue(scenario_for_run(spec, k).observation.noise_cov);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    TheoremSummary s{policies[p]};
    for (const RunTrace& tr : traces[p]) {
      const std::size_t T = tr.horizon();
      if (!tr.p_hat.empty())
        for (const auto& flag : arm_count_check(tr, tr.p_hat, T))
          if (flag) {
            ++s.arm_count_pairs;
            s.arm_count_pass += *flag ? 1 : 0;
          }
      const Checkpoint* c = tr.checkpoint_at(T);
      if (!c || c->min_eig.empty()) continue;
      for (std::size_t i = 0; i < tr.num_arms; ++i) {
        if (c->pulls[i] < 200) continue;
        ++s.eigen_pairs;
        if (*eigen_growth_check(tr, i, T) >= 0.5 * noise_floor[tr.run]) ++s.eigen_pass;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentReport run_experiment(const ScenarioSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.spec = spec;
  report.policies = spec.policies;
  report.grid = checkpoint_grid(spec.horizon, spec.checkpoint_every);
  for (std::size_t k = 0; k < spec.runs; ++k) report.seeds.push_back(run_seed(spec.base_seed, k));
  report.traces.assign(spec.policies.size(), std::vector<RunTrace>(spec.runs));

  std::optional<RealDataContext> ctx;
  if (spec.real_data()) ctx = RealDataContext::load(spec);

  const std::size_t jobs = spec.policies.size() * spec.runs;
  std::size_t workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const std::size_t p = j / spec.runs;
      const std::size_t k = j % spec.runs;
      try {
        report.traces[p][k] = ctx ? run_single_real(spec, *ctx, spec.policies[p], k)
                                  : run_single(spec, spec.policies[p], k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  report.curves = build_series(spec, report.policies, report.traces, report.grid);
  report.theorems = summarize_theorems(spec, report.policies, report.traces);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<ScenarioSpec> figure_recipe(int figure, std::size_t runs, std::size_t horizon) {
  std::vector<ScenarioSpec> out;
  ScenarioSpec base;
  base.horizon = 20000;
  base.runs = 50;
  base.checkpoint_every = 1000;
  auto finish = [&](ScenarioSpec s) {
    if (runs) s.runs = runs;
    if (horizon) {
      s.horizon = horizon;
      s.checkpoint_every = std::max<std::size_t>(1, horizon / 20);
    }
    out.push_back(std::move(s));
  };
  const std::size_t dims[] = {10, 20, 40, 80};
  switch (figure) {
    case 1:
      for (std::size_t dx : dims)
        for (std::size_t dy : dims) {
          ScenarioSpec s = base;
          s.name = "fig1_dx" + std::to_string(dx) + "_dy" + std::to_string(dy);
          s.d_x = dx;
          s.d_y = dy;
          s.num_arms = 5;
          finish(s);
        }
      break;
    case 2:
      for (std::size_t dx : {10, 20, 40}) {
        ScenarioSpec s = base;
        s.name = "fig2_dx" + std::to_string(dx) + "_dy20";
        s.d_x = dx;
        s.d_y = 20;
        s.num_arms = 5;
        finish(s);
      }
      break;
    case 3:
      for (std::size_t n : {10, 20, 30}) {
        ScenarioSpec s = base;
        s.name = "fig3_N" + std::to_string(n);
        s.num_arms = n;
        s.policies = {"ts", "greedy"};
        s.margin_samples = 0;
        finish(s);
      }
      break;
    case 4: {
      struct Standin { const char* name; const char* file; std::size_t d_y; };
      const Standin standins[] = {{"egg", "egg_standin.csv", 10}, {"eye", "eye_standin.csv", 13}};
      for (const auto& sd : standins)
        for (RewardMode mode : {RewardMode::logistic, RewardMode::simple_linear}) {
          ScenarioSpec s = base;
          s.name = std::string("fig4_") + sd.name + "_" + std::string(to_string(mode));
          s.dataset_path = std::filesystem::path(POBANDIT_DATA_DIR) / sd.file;
          s.label_column = "label";
          s.reward_mode = mode;
          s.d_y = sd.d_y;
          s.horizon = 5000;
          s.runs = 100;
          s.checkpoint_every = 100;
          s.policies = {"ts", "regression_oracle"};
          s.margin_samples = 0;
          if (runs) s.runs = runs;
          if (horizon) s.horizon = horizon;
          out.push_back(std::move(s));
        }
      break;
    }
    default:
      throw Error(ErrorKind::InvalidArgument, "no recipe for figure " + std::to_string(figure));
  }
  return out;
}

}  // namespace pobandit
