#pragma once

// Generative environment for partially observed linear contextual bandits:
// latent contexts x_i, observations y_i = A x_i + xi_i, rewards x_a^T mu_a + eps.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pobandit/linalg.hpp"
#include "pobandit/rng.hpp"

namespace pobandit {

/// D = (A^T S_xi^{-1} A + S_x^{-1})^{-1} A^T S_xi^{-1}, the best linear unbiased
/// predictor of x from y. Returns a d_x by d_y matrix.
DenseMatrix build_blup(const DenseMatrix& sensing, const SpdMatrix& context_cov,
                       const SpdMatrix& noise_cov);

/// The same matrix through the gain form S_x A^T (A S_x A^T + S_xi)^{-1}.
DenseMatrix build_blup_gain_form(const DenseMatrix& sensing, const SpdMatrix& context_cov,
                                 const SpdMatrix& noise_cov);

struct ObservationModel {
  DenseMatrix sensing;    // A, d_y x d_x
  SpdMatrix context_cov;  // Sigma_x
  SpdMatrix noise_cov;    // Sigma_xi
  DenseMatrix blup;       // D, d_x x d_y

  static ObservationModel create(DenseMatrix sensing, SpdMatrix context_cov, SpdMatrix noise_cov);

  std::size_t context_dim() const { return sensing.cols(); }
  std::size_t observation_dim() const { return sensing.rows(); }
};

enum class ArmMode { arm_specific, shared_param, shared_context };

std::string_view to_string(ArmMode mode);
ArmMode parse_arm_mode(std::string_view text);

struct ArmSet {
  ArmMode mode = ArmMode::arm_specific;
  std::vector<Vector> mu;   // reward parameters, d_x each
  std::vector<Vector> eta;  // transformed parameters D^T mu, d_y each
  double reward_noise = 0.0;

  static ArmSet create(ArmMode mode, std::vector<Vector> mu, const DenseMatrix& blup,
                       double reward_noise);
  std::size_t size() const { return mu.size(); }
};

struct Environment {
  ObservationModel observation;
  ArmSet arms;

  std::size_t num_arms() const { return arms.size(); }
};

struct Round {
  std::size_t t = 0;
  std::vector<Vector> x;  // latent; never handed to policies
  std::vector<Vector> y;
  std::size_t optimal_arm = 0;
  double optimal_value = 0.0;
};

/// What a policy is allowed to see of a round.
class PolicyView {
 public:
  explicit PolicyView(const Round& round) : t_(round.t), y_(round.y) {}
  PolicyView(std::size_t t, std::span<const Vector> y) : t_(t), y_(y) {}

  std::size_t t() const { return t_; }
  std::span<const Vector> y() const { return y_; }
  std::size_t num_arms() const { return y_.size(); }

 private:
  std::size_t t_;
  std::span<const Vector> y_;
};

/// argmax_i scores[i], lowest index on ties.
std::size_t argmax_lowest(std::span<const double> scores);

/// Fills optimal_arm/optimal_value for given latent contexts and observations.
Round assemble_round(std::size_t t, std::vector<Vector> x, std::vector<Vector> y,
                     std::span<const Vector> eta);

Round sample_round(const Environment& env, std::size_t t, RandomStream& rng);

/// x_arm^T mu_arm + reward_noise * N(0,1). Only the chosen arm is realized.
double realize_reward(const Environment& env, std::size_t arm, const Round& round, RandomStream& rng);

/// y_{a*}^T eta_{a*} - y_a^T eta_a.
double gap(std::span<const Vector> y, std::span<const Vector> eta, std::size_t chosen);
inline double gap(const Round& round, std::span<const Vector> eta, std::size_t chosen) {
  return gap(round.y, eta, chosen);
}

/// Var(x^T mu_arm | y): the prediction error left by the BLUP.
double prediction_error_variance(const Environment& env, std::size_t arm);
/// sqrt(R1^2 + max_i Var(x^T mu_i | y)).
double default_dispersion(const Environment& env);

struct MarginEstimate {
  std::vector<double> p_hat;
  std::vector<double> kappa_per_arm;  // median normalized gap given a* = i (0 if no samples)
  double kappa_hat = 0.0;             // min over arms with samples
  double c_hat = 0.0;
  std::size_t num_samples = 0;
};

/// Monte Carlo estimate of optimality probabilities and margin constants.
MarginEstimate estimate_margin(const Environment& env, std::size_t num_samples, RandomStream& rng);

struct ScenarioShape {
  std::size_t d_x = 10;
  std::size_t d_y = 10;
  std::size_t num_arms = 5;
  ArmMode mode = ArmMode::arm_specific;
  double reward_noise = 0.1;   // R1
  double sensing_noise = 1.0;  // multiplier on the random Sigma_xi
  double param_norm = 1.0;     // ||mu_i||
};

/// Random SPD covariance G G^T / d + 0.1 I with standard Gaussian G.
SpdMatrix random_covariance(std::size_t d, RandomStream& rng);

/// Random environment: covariances from random_covariance, A with
/// N(0, 1/d_x) entries, mu_i uniform on the sphere of radius param_norm.
Environment random_scenario(const ScenarioShape& shape, RandomStream& rng);

}  // namespace pobandit
