#include "pobandit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pobandit/errors.hpp"

namespace pobandit {

namespace {

void check_shapes(const DenseMatrix& sensing, const SpdMatrix& context_cov, const SpdMatrix& noise_cov) {
  if (sensing.cols() != context_cov.dim() || sensing.rows() != noise_cov.dim())
    throw Error(ErrorKind::DimensionMismatch, "observation model: A must be d_y x d_x");
}

// Solves S X = B column by column.
DenseMatrix solve_columns(const SpdMatrix& s, const DenseMatrix& b) {
  DenseMatrix out(b.rows(), b.cols());
  Vector col(b.rows());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t r = 0; r < b.rows(); ++r) col[r] = b(r, c);
    const Vector x = s.solve(col);
    for (std::size_t r = 0; r < b.rows(); ++r) out(r, c) = x[r];
  }
  return out;
}

DenseMatrix symmetrized(DenseMatrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = avg;
      m(j, i) = avg;
    }
  return m;
}

}  // namespace

DenseMatrix build_blup(const DenseMatrix& sensing, const SpdMatrix& context_cov,
                       const SpdMatrix& noise_cov) {
  check_shapes(sensing, context_cov, noise_cov);
  const DenseMatrix w = solve_columns(noise_cov, sensing);  // S_xi^{-1} A
  const SpdMatrix info(symmetrized(sensing.transpose() * w + context_cov.inverse()));
  return solve_columns(info, w.transpose());
}

DenseMatrix build_blup_gain_form(const DenseMatrix& sensing, const SpdMatrix& context_cov,
                                 const SpdMatrix& noise_cov) {
  check_shapes(sensing, context_cov, noise_cov);
  const DenseMatrix cross = context_cov.entries() * sensing.transpose();  // S_x A^T
  const SpdMatrix obs_cov(symmetrized(sensing * cross + noise_cov.entries()));
  // D = cross * obs_cov^{-1}  <=>  D^T = obs_cov^{-1} cross^T
  return solve_columns(obs_cov, cross.transpose()).transpose();
}

ObservationModel ObservationModel::create(DenseMatrix sensing, SpdMatrix context_cov,
                                          SpdMatrix noise_cov) {
  if (!sensing.all_finite()) throw Error(ErrorKind::InvalidArgument, "sensing matrix not finite");
  DenseMatrix d = build_blup(sensing, context_cov, noise_cov);
  return ObservationModel{std::move(sensing), std::move(context_cov), std::move(noise_cov), std::move(d)};
}

std::string_view to_string(ArmMode mode) {
  switch (mode) {
    case ArmMode::arm_specific: return "arm_specific";
    case ArmMode::shared_param: return "shared_param";
    case ArmMode::shared_context: return "shared_context";
  }
  return "arm_specific";
}

ArmMode parse_arm_mode(std::string_view text) {
  if (text == "arm_specific") return ArmMode::arm_specific;
  if (text == "shared_param") return ArmMode::shared_param;
  if (text == "shared_context") return ArmMode::shared_context;
  throw Error(ErrorKind::InvalidConfig, "unknown arm mode '" + std::string(text) + "'");
}

ArmSet ArmSet::create(ArmMode mode, std::vector<Vector> mu, const DenseMatrix& blup, double reward_noise) {
  if (mu.empty()) throw Error(ErrorKind::InvalidArgument, "ArmSet: no arms");
  if (reward_noise < 0.0) throw Error(ErrorKind::InvalidArgument, "ArmSet: negative reward noise");
  ArmSet set;
  set.mode = mode;
  set.reward_noise = reward_noise;
  for (const Vector& m : mu) {
    if (m.dim() != blup.rows()) throw Error(ErrorKind::DimensionMismatch, "ArmSet: mu has wrong dimension");
    if (mode == ArmMode::shared_param && !(m == mu.front()))
      throw Error(ErrorKind::InvalidArgument, "ArmSet: shared_param requires identical mu");
    set.eta.push_back(multiply_transposed(blup, m));
  }
  set.mu = std::move(mu);
  return set;
}

std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

Round assemble_round(std::size_t t, std::vector<Vector> x, std::vector<Vector> y,
                     std::span<const Vector> eta) {
  if (y.size() != eta.size()) throw Error(ErrorKind::DimensionMismatch, "round: one y per arm required");
  std::vector<double> scores(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) scores[i] = dot(y[i], eta[i]);
  Round r;
  r.t = t;
  r.x = std::move(x);
  r.y = std::move(y);
  r.optimal_arm = argmax_lowest(scores);
  r.optimal_value = scores[r.optimal_arm];
  return r;
}

namespace {

Vector draw_correlated(const SpdMatrix& cov, RandomStream& rng) {
  Vector z(cov.dim());
  rng.fill_normal(z.values());
  const auto& l = cov.chol();
  Vector out(cov.dim());
  for (std::size_t i = 0; i < cov.dim(); ++i) {
    const auto row = l.matrix().row(i);
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
    out[i] = s;
  }
  return out;
}

}  // namespace

Round sample_round(const Environment& env, std::size_t t, RandomStream& rng) {
  const auto& obs = env.observation;
  const std::size_t n = env.num_arms();
  std::vector<Vector> x;
  std::vector<Vector> y;
  x.reserve(n);
  y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (env.arms.mode == ArmMode::shared_context && i > 0)
      x.push_back(x.front());
    else
      x.push_back(draw_correlated(obs.context_cov, rng));
    Vector yi = obs.sensing * x.back();
    axpy(1.0, draw_correlated(obs.noise_cov, rng), yi);
    y.push_back(std::move(yi));
  }
  return assemble_round(t, std::move(x), std::move(y), env.arms.eta);
}

double realize_reward(const Environment& env, std::size_t arm, const Round& round, RandomStream& rng) {
  if (arm >= env.num_arms()) throw Error(ErrorKind::InvalidArgument, "realize_reward: arm out of range");
  const double mean = dot(round.x[arm], env.arms.mu[arm]);
  if (env.arms.reward_noise == 0.0) return mean;
  return mean + env.arms.reward_noise * rng.normal();
}

double gap(std::span<const Vector> y, std::span<const Vector> eta, std::size_t chosen) {
  if (y.size() != eta.size() || chosen >= y.size())
    throw Error(ErrorKind::DimensionMismatch, "gap: bad arm index or sizes");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i) best = std::max(best, dot(y[i], eta[i]));
  return best - dot(y[chosen], eta[chosen]);
}

double prediction_error_variance(const Environment& env, std::size_t arm) {
  const auto& obs = env.observation;
  // Cov(x | y) = S_x - D A S_x
  const DenseMatrix cond = obs.context_cov.entries() - obs.blup * (obs.sensing * obs.context_cov.entries());
  const Vector& mu = env.arms.mu.at(arm);
  return std::max(0.0, dot(mu, cond * mu));
}

double default_dispersion(const Environment& env) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < env.num_arms(); ++i) r2 = std::max(r2, prediction_error_variance(env, i));
  return std::sqrt(env.arms.reward_noise * env.arms.reward_noise + r2);
}

MarginEstimate estimate_margin(const Environment& env, std::size_t num_samples, RandomStream& rng) {
  if (num_samples < 1000) throw Error(ErrorKind::InvalidArgument, "estimate_margin: need >= 1000 samples");
  const std::size_t n = env.num_arms();
  std::vector<std::size_t> wins(n, 0);
  std::vector<std::vector<double>> gaps(n);
  std::vector<double> scores(n);
  for (std::size_t s = 0; s < num_samples; ++s) {
    const Round r = sample_round(env, s, rng);
    ++wins[r.optimal_arm];
    if (n < 2) continue;
    double total = 0.0;
    for (const Vector& yi : r.y) total += dot(yi, yi);
    const double scale = std::sqrt(total);
    if (!(scale > 0.0)) continue;
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (i != r.optimal_arm) runner_up = std::max(runner_up, dot(r.y[i], env.arms.eta[i]));
    gaps[r.optimal_arm].push_back((r.optimal_value - runner_up) / scale);
  }

  MarginEstimate est;
  est.num_samples = num_samples;
  est.p_hat.resize(n);
  est.kappa_per_arm.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) est.p_hat[i] = static_cast<double>(wins[i]) / num_samples;

  bool any = false;
  double kappa = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    auto& g = gaps[i];
    if (g.empty()) continue;
    std::sort(g.begin(), g.end());
    // Median: the gap level exceeded with conditional probability 1/2.
    const double median = g.size() % 2 ? g[g.size() / 2] : 0.5 * (g[g.size() / 2 - 1] + g[g.size() / 2]);
    est.kappa_per_arm[i] = median;
    kappa = std::min(kappa, median);
    any = true;
    // Slope of the conditional CDF at its 10% quantile.
    if (g.size() >= 20) {
      const double u = g[g.size() / 10];
      if (u > 0.0) est.c_hat = std::max(est.c_hat, (static_cast<double>(g.size() / 10 + 1) / g.size()) / u);
    }
  }
  est.kappa_hat = any ? kappa : 0.0;
  return est;
}

SpdMatrix random_covariance(std::size_t d, RandomStream& rng) {
  DenseMatrix g(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) g(r, c) = rng.normal();
  DenseMatrix cov = (1.0 / static_cast<double>(d)) * (g * g.transpose());
  for (std::size_t i = 0; i < d; ++i) cov(i, i) += 0.1;
  return SpdMatrix(symmetrized(std::move(cov)));
}

Environment random_scenario(const ScenarioShape& shape, RandomStream& rng) {
  if (shape.d_x == 0 || shape.d_y == 0 || shape.num_arms == 0)
    throw Error(ErrorKind::InvalidDims, "random_scenario: dimensions must be positive");
  if (!(shape.sensing_noise > 0.0)) throw Error(ErrorKind::InvalidArgument, "sensing_noise must be > 0");
  SpdMatrix context_cov = random_covariance(shape.d_x, rng);
  SpdMatrix noise_cov = random_covariance(shape.d_y, rng);
  if (shape.sensing_noise != 1.0) noise_cov = SpdMatrix(shape.sensing_noise * noise_cov.entries());
  DenseMatrix a(shape.d_y, shape.d_x);
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(shape.d_x));
  for (std::size_t r = 0; r < shape.d_y; ++r)
    for (std::size_t c = 0; c < shape.d_x; ++c) a(r, c) = a_scale * rng.normal();

  auto on_sphere = [&] {
    Vector m(shape.d_x);
    rng.fill_normal(m.values());
    const double len = norm(m);
    return (shape.param_norm / len) * m;
  };
  std::vector<Vector> mu;
  if (shape.mode == ArmMode::shared_param) {
    mu.assign(shape.num_arms, on_sphere());
  } else {
    for (std::size_t i = 0; i < shape.num_arms; ++i) mu.push_back(on_sphere());
  }
  ObservationModel obs = ObservationModel::create(std::move(a), std::move(context_cov), std::move(noise_cov));
  ArmSet arms = ArmSet::create(shape.mode, std::move(mu), obs.blup, shape.reward_noise);
  return Environment{std::move(obs), std::move(arms)};
}

}  // namespace pobandit
