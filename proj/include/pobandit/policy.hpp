#pragma once

// Decision policies. Every policy sees a round only through PolicyView, which
// carries the observations y_i(t) and nothing else.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pobandit/linalg.hpp"
#include "pobandit/model.hpp"
#include "pobandit/rng.hpp"

namespace pobandit {

struct ArmPosterior {
  SpdMatrix precision;  // B_i, unscaled inverse covariance
  Vector eta_hat;
  std::size_t pulls = 0;
};

/// Per-arm Gaussian posteriors N(eta_hat_i, v^2 B_i^{-1}). In shared mode one
/// record serves every arm.
class PosteriorState {
 public:
  PosteriorState(std::size_t num_arms, std::size_t dim, double dispersion, bool shared);

  std::size_t num_arms() const { return num_arms_; }
  std::size_t dim() const { return dim_; }
  double dispersion() const { return dispersion_; }
  bool shared() const { return shared_; }
  const ArmPosterior& arm(std::size_t i) const { return records_.at(shared_ ? 0 : i); }

  /// B <- B + y y^T;  eta_hat <- B_new^{-1} (B_old eta_hat + y r).
  void update(std::size_t chosen, const Vector& y, double reward);

 private:
  std::size_t num_arms_;
  std::size_t dim_;
  double dispersion_;
  bool shared_;
  std::vector<ArmPosterior> records_;
};

struct PolicyDecision {
  std::size_t chosen = 0;
  std::vector<Vector> sampled_eta;  // empty for non-sampling policies
  std::vector<double> scores;
};

/// Prior state: B_i = I, eta_hat_i = 0. Throws InvalidDispersion if v <= 0.
PosteriorState ts_init(std::size_t num_arms, std::size_t dim, double dispersion, bool shared = false);

/// Thompson step: eta_tilde_i ~ N(eta_hat_i, v^2 B_i^{-1}) independently per
/// arm, choose argmax_i y_i^T eta_tilde_i.
PolicyDecision ts_decide(const PosteriorState& state, std::span<const Vector> y, RandomStream& rng);
/// Thompson step with caller-supplied standard normals (one vector per arm).
PolicyDecision ts_decide_with_normals(const PosteriorState& state, std::span<const Vector> y,
                                      std::span<const Vector> normals);
void ts_update(PosteriorState& state, std::size_t chosen, const Vector& y, double reward);

struct Pull {
  std::size_t arm = 0;
  Vector y;
  double reward = 0.0;
};

struct ClosedFormPosterior {
  SpdMatrix precision;
  Vector eta_hat;
};

/// Batch posterior from a pull history: B = I + sum y y^T, eta_hat = B^{-1} sum r y,
/// summing over pulls of `arm` (or over all pulls when shared).
ClosedFormPosterior closed_form_posterior(std::span<const Pull> history, std::size_t arm,
                                          std::size_t dim, bool shared = false);

PolicyDecision greedy_decide(const PosteriorState& state, std::span<const Vector> y);
PolicyDecision oracle_decide(std::span<const Vector> eta, std::span<const Vector> y);
PolicyDecision random_decide(std::size_t num_arms, RandomStream& rng);

/// One round of hindsight data: every arm's observation and reward.
struct HindsightSample {
  std::vector<Vector> y;
  std::vector<double> reward;
};

/// Per-arm ridge regression over all samples: (I + sum y y^T)^{-1} sum r y.
/// Throws EmptyDataset on empty input.
std::vector<Vector> regression_oracle_fit(std::span<const HindsightSample> data);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual PolicyDecision decide(const PolicyView& view, RandomStream& rng) = 0;
  virtual void update(std::size_t /*arm*/, const Vector& /*y*/, double /*reward*/) {}
  virtual const PosteriorState* posterior() const { return nullptr; }
};

class ThompsonPolicy final : public Policy {
 public:
  ThompsonPolicy(std::size_t num_arms, std::size_t dim, double dispersion, bool shared = false)
      : state_(ts_init(num_arms, dim, dispersion, shared)) {}
  std::string_view name() const override { return "ts"; }
  PolicyDecision decide(const PolicyView& view, RandomStream& rng) override {
    return ts_decide(state_, view.y(), rng);
  }
  void update(std::size_t arm, const Vector& y, double reward) override { ts_update(state_, arm, y, reward); }
  const PosteriorState* posterior() const override { return &state_; }

 private:
  PosteriorState state_;
};

class GreedyPolicy final : public Policy {
 public:
  GreedyPolicy(std::size_t num_arms, std::size_t dim, bool shared = false)
      : state_(ts_init(num_arms, dim, 1.0, shared)) {}
  std::string_view name() const override { return "greedy"; }
  PolicyDecision decide(const PolicyView& view, RandomStream&) override { return greedy_decide(state_, view.y()); }
  void update(std::size_t arm, const Vector& y, double reward) override { ts_update(state_, arm, y, reward); }
  const PosteriorState* posterior() const override { return &state_; }

 private:
  PosteriorState state_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::size_t num_arms) : num_arms_(num_arms) {}
  std::string_view name() const override { return "random"; }
  PolicyDecision decide(const PolicyView&, RandomStream& rng) override { return random_decide(num_arms_, rng); }

 private:
  std::size_t num_arms_;
};

/// Fixed-parameter argmax policy: the benchmark a*(t) when given the true
/// transformed parameters, the hindsight regression oracle when given fitted ones.
class FixedParameterPolicy final : public Policy {
 public:
  FixedParameterPolicy(std::vector<Vector> eta, std::string name)
      : eta_(std::move(eta)), name_(std::move(name)) {}
  std::string_view name() const override { return name_; }
  PolicyDecision decide(const PolicyView& view, RandomStream&) override { return oracle_decide(eta_, view.y()); }

 private:
  std::vector<Vector> eta_;
  std::string name_;
};

}  // namespace pobandit
