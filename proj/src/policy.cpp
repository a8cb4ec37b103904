#include "pobandit/policy.hpp"

#include "pobandit/errors.hpp"

namespace pobandit {

namespace {

void check_observations(std::span<const Vector> y, std::size_t num_arms, std::size_t dim) {
  if (y.size() != num_arms) throw Error(ErrorKind::DimensionMismatch, "expected one observation per arm");
  for (const Vector& yi : y)
    if (yi.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "observation has wrong dimension");
}

}  // namespace

PosteriorState::PosteriorState(std::size_t num_arms, std::size_t dim, double dispersion, bool shared)
    : num_arms_(num_arms), dim_(dim), dispersion_(dispersion), shared_(shared) {
  if (!(dispersion > 0.0)) throw Error(ErrorKind::InvalidDispersion, "posterior dispersion must be > 0");
  if (num_arms == 0 || dim == 0) throw Error(ErrorKind::InvalidDims, "posterior needs >= 1 arm and dim >= 1");
  const std::size_t records = shared ? 1 : num_arms;
  records_.reserve(records);
  for (std::size_t i = 0; i < records; ++i) records_.push_back({SpdMatrix::identity(dim), Vector(dim), 0});
}

void PosteriorState::update(std::size_t chosen, const Vector& y, double reward) {
  if (chosen >= num_arms_) throw Error(ErrorKind::InvalidArgument, "update: arm out of range");
  if (y.dim() != dim_) throw Error(ErrorKind::DimensionMismatch, "update: observation has wrong dimension");
  ArmPosterior& rec = records_[shared_ ? 0 : chosen];
  Vector rhs = rec.precision * rec.eta_hat;
  axpy(reward, y, rhs);
  rec.precision.rank_one_update(y);
  rec.eta_hat = rec.precision.solve(rhs);
  ++rec.pulls;
}

PosteriorState ts_init(std::size_t num_arms, std::size_t dim, double dispersion, bool shared) {
  return PosteriorState(num_arms, dim, dispersion, shared);
}

PolicyDecision ts_decide_with_normals(const PosteriorState& state, std::span<const Vector> y,
                                      std::span<const Vector> normals) {
  check_observations(y, state.num_arms(), state.dim());
  if (normals.size() != state.num_arms()) throw Error(ErrorKind::DimensionMismatch, "one normal draw per arm");
  PolicyDecision d;
  d.sampled_eta.reserve(y.size());
  d.scores.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const ArmPosterior& rec = state.arm(i);
    d.sampled_eta.push_back(
        sample_gaussian_from_normals(rec.eta_hat, rec.precision.chol(), state.dispersion(), normals[i]));
    d.scores.push_back(dot(y[i], d.sampled_eta.back()));
  }
  d.chosen = argmax_lowest(d.scores);
  return d;
}

PolicyDecision ts_decide(const PosteriorState& state, std::span<const Vector> y, RandomStream& rng) {
  std::vector<Vector> normals(state.num_arms(), Vector(state.dim()));
  for (Vector& z : normals) rng.fill_normal(z.values());
  return ts_decide_with_normals(state, y, normals);
}

void ts_update(PosteriorState& state, std::size_t chosen, const Vector& y, double reward) {
  state.update(chosen, y, reward);
}

ClosedFormPosterior closed_form_posterior(std::span<const Pull> history, std::size_t arm, std::size_t dim,
                                          bool shared) {
  DenseMatrix b = DenseMatrix::identity(dim);
  Vector s(dim);
  for (const Pull& p : history) {
    if (!shared && p.arm != arm) continue;
    if (p.y.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "history observation has wrong dimension");
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) b(r, c) += p.y[r] * p.y[c];
    axpy(p.reward, p.y, s);
  }
  SpdMatrix precision(std::move(b));
  Vector eta_hat = precision.solve(s);
  return {std::move(precision), std::move(eta_hat)};
}

PolicyDecision greedy_decide(const PosteriorState& state, std::span<const Vector> y) {
  check_observations(y, state.num_arms(), state.dim());
  PolicyDecision d;
  d.scores.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) d.scores.push_back(dot(y[i], state.arm(i).eta_hat));
  d.chosen = argmax_lowest(d.scores);
  return d;
}

PolicyDecision oracle_decide(std::span<const Vector> eta, std::span<const Vector> y) {
  if (eta.size() != y.size() || y.empty()) throw Error(ErrorKind::DimensionMismatch, "oracle: one eta per arm");
  PolicyDecision d;
  d.scores.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) d.scores.push_back(dot(y[i], eta[i]));
  d.chosen = argmax_lowest(d.scores);
  return d;
}

PolicyDecision random_decide(std::size_t num_arms, RandomStream& rng) {
  if (num_arms == 0) throw Error(ErrorKind::InvalidDims, "random_decide: no arms");
  PolicyDecision d;
  d.chosen = rng.uniform_index(num_arms);
  d.scores.assign(num_arms, 0.0);
  d.scores[d.chosen] = 1.0;
  return d;
}

std::vector<Vector> regression_oracle_fit(std::span<const HindsightSample> data) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "regression oracle needs data");
  const std::size_t arms = data.front().y.size();
  const std::size_t dim = data.front().y.front().dim();
  std::vector<DenseMatrix> gram(arms, DenseMatrix::identity(dim));
  std::vector<Vector> moment(arms, Vector(dim));
  for (const HindsightSample& s : data) {
    if (s.y.size() != arms || s.reward.size() != arms)
      throw Error(ErrorKind::DimensionMismatch, "hindsight sample: one y and reward per arm");
    for (std::size_t i = 0; i < arms; ++i) {
      const Vector& y = s.y[i];
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) gram[i](r, c) += y[r] * y[c];
      axpy(s.reward[i], y, moment[i]);
    }
  }
  std::vector<Vector> eta;
  eta.reserve(arms);
  for (std::size_t i = 0; i < arms; ++i) eta.push_back(SpdMatrix(std::move(gram[i])).solve(moment[i]));
  return eta;
}

}  // namespace pobandit
