#pragma once

// Labeled tabular data turned into a shared-context bandit: each class is an
// arm, rewards are synthesized from per-class linear parameters, and the
// policy only sees sensed observations A x + xi_i of the row's features.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "pobandit/linalg.hpp"
#include "pobandit/policy.hpp"
#include "pobandit/rng.hpp"

namespace pobandit {

struct Standardization {
  Vector mean;
  Vector scale;

  /// Column means and population standard deviations; columns with variance
  /// below 1e-12 get scale 1 (and so standardize to zero).
  static Standardization fit(const std::vector<Vector>& rows);
  Vector apply(const Vector& row) const;
};

struct LabeledDataset {
  std::vector<Vector> features;     // standardized
  std::vector<std::size_t> labels;  // in [0, num_classes)
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // sorted label values
  std::size_t d_x = 0;
  std::size_t num_classes = 0;
  Standardization standardization;

  std::size_t size() const { return labels.size(); }
};

/// Parses comma-separated text with a header row. Every column other than
/// `label_column` must be numeric.
LabeledDataset parse_csv(std::istream& in, std::string_view label_column, std::string_view source = "<stream>");
LabeledDataset load_csv(const std::filesystem::path& path, std::string_view label_column);

enum class RewardMode { logistic, simple_linear };
std::string_view to_string(RewardMode mode);
RewardMode parse_reward_mode(std::string_view text);

struct RewardSynthesis {
  RewardMode mode = RewardMode::logistic;
  std::vector<Vector> mu;  // one per class
  double noise_scale = 0.1;
};

struct LogisticFit {
  Vector coef;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

/// L2-regularized logistic regression without intercept, maximizing
/// mean log-likelihood - ridge/2 ||w||^2 by damped Newton ascent.
/// Throws NonConvergence if the gradient norm is still above `tol` after
/// `max_iter` steps.
LogisticFit fit_logistic(const std::vector<Vector>& x, const std::vector<double>& target, double ridge = 1e-4,
                         double tol = 1e-6, std::size_t max_iter = 500);

/// Per-class parameters: one-vs-rest logistic coefficients, or ridge least
/// squares of the class indicator on the features.
RewardSynthesis fit_reward_params(const LabeledDataset& data, RewardMode mode, double noise_scale = 0.1,
                                  double ridge = 1e-4);

/// 0/1 matrix (d_y x d_x) summing a random partition of the d_x inputs into
/// d_y nonempty groups. Throws InvalidDims unless 1 <= d_y <= d_x.
DenseMatrix make_sensing(std::size_t d_x, std::size_t d_y, RandomStream& rng);

struct LabeledRound {
  std::size_t t = 0;
  std::size_t row = 0;
  std::size_t label = 0;
  Vector x;               // shared context (standardized row)
  std::vector<Vector> y;  // one sensed observation per arm
};

/// Rounds drawn by sampling dataset rows uniformly with replacement.
class RoundStream {
 public:
  RoundStream(const LabeledDataset& data, const RewardSynthesis& synthesis, DenseMatrix sensing,
              double noise_variance, RandomStream rng);

  LabeledRound next();
  /// x^T mu_arm + noise_scale * N(0,1).
  double reward(const LabeledRound& round, std::size_t arm, RandomStream& rng) const;
  std::size_t num_arms() const { return synthesis_->mu.size(); }
  const DenseMatrix& sensing() const { return sensing_; }

 private:
  const LabeledDataset* data_;
  const RewardSynthesis* synthesis_;
  DenseMatrix sensing_;
  double noise_sd_;
  RandomStream rng_;
  std::size_t t_ = 0;
};

/// Sensed observations and synthesized rewards for every arm on every
/// dataset row, once each: the regression oracle's training set.
std::vector<HindsightSample> hindsight_samples(const LabeledDataset& data, const RewardSynthesis& synthesis,
                                               const DenseMatrix& sensing, double noise_variance,
                                               RandomStream& rng);

}  // namespace pobandit
