#include <cmath>

#include "doctest.h"
#include "pobandit/errors.hpp"
#include "pobandit/policy.hpp"
#include "support.hpp"

using namespace pobandit;
using namespace testing;

namespace {

std::vector<Vector> zeros(std::size_t n, std::size_t d) { return std::vector<Vector>(n, Vector(d)); }

std::vector<Vector> random_ys(std::size_t n, std::size_t d, RandomStream& rng) {
  std::vector<Vector> y;
  for (std::size_t i = 0; i < n; ++i) y.push_back(random_vector(d, rng));
  return y;
}

PosteriorState random_state(std::size_t n, std::size_t d, std::size_t pulls, RandomStream& rng) {
  PosteriorState s = ts_init(n, d, 0.7);
  for (std::size_t k = 0; k < pulls; ++k) ts_update(s, rng.uniform_index(n), random_vector(d, rng), rng.normal());
  return s;
}

}  // namespace

TEST_CASE("ts_init prior") {
  const PosteriorState s = ts_init(3, 2, 1.0);
  CHECK(s.num_arms() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s.arm(i).precision.entries() == DenseMatrix::identity(2));
    CHECK(s.arm(i).eta_hat == Vector(2));
    CHECK(s.arm(i).pulls == 0);
  }
  CHECK(ts_init(1, 4, 1.0).num_arms() == 1);
  try {
    ts_init(2, 2, 0.0);
    FAIL("expected InvalidDispersion");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidDispersion);
  }
}

TEST_CASE("ts_update hand-solved example") {
  PosteriorState s = ts_init(2, 2, 1.0);
  const PosteriorState before = s;
  ts_update(s, 0, Vector{1, 0}, 2.0);
  CHECK(max_abs_diff(s.arm(0).precision.entries(), DenseMatrix{{2, 0}, {0, 1}}) == 0.0);
  CHECK(max_abs_diff(s.arm(0).eta_hat, Vector{1, 0}) < 1e-15);
  CHECK(s.arm(0).pulls == 1);
  CHECK(s.arm(1).precision.entries() == before.arm(1).precision.entries());
  CHECK(s.arm(1).precision.chol().matrix() == before.arm(1).precision.chol().matrix());
  CHECK(s.arm(1).eta_hat == before.arm(1).eta_hat);
  CHECK(s.arm(1).pulls == 0);
}

TEST_CASE("ts_update leaves other arms bit-identical") {
  RandomStream rng(40);
  PosteriorState s = random_state(4, 3, 50, rng);
  const PosteriorState before = s;
  ts_update(s, 2, random_vector(3, rng), 1.3);
  for (std::size_t i : {0, 1, 3}) {
    CHECK(s.arm(i).precision.entries() == before.arm(i).precision.entries());
    CHECK(s.arm(i).eta_hat == before.arm(i).eta_hat);
    CHECK(s.arm(i).pulls == before.arm(i).pulls);
  }
}

TEST_CASE("recursion equals closed-form batch posterior") {
  RandomStream rng(41);
  const std::size_t n = 3, d = 4;
  PosteriorState s = ts_init(n, d, 1.0);
  std::vector<Pull> history;
  for (int k = 0; k < 500; ++k) {
    Pull p{rng.uniform_index(n), random_vector(d, rng), 2.0 * rng.normal()};
    ts_update(s, p.arm, p.y, p.reward);
    history.push_back(p);
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Batch oracle built from scratch with Gauss-Jordan, independent of the library's solvers.
    DenseMatrix b = DenseMatrix::identity(d);
    Vector rhs(d);
    for (const Pull& p : history)
      if (p.arm == i)
        for (std::size_t r = 0; r < d; ++r) {
          rhs[r] += p.reward * p.y[r];
          for (std::size_t c = 0; c < d; ++c) b(r, c) += p.y[r] * p.y[c];
        }
    const DenseMatrix binv = gauss_jordan_inverse(b);
    Vector eta(d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) eta[r] += binv(r, c) * rhs[c];
    CHECK(max_relative_deviation(s.arm(i).precision.entries(), b) <= 1e-8);
    CHECK(max_relative_deviation(s.arm(i).eta_hat, eta) <= 1e-8);

    const ClosedFormPosterior cf = closed_form_posterior(history, i, d);
    CHECK(max_relative_deviation(cf.precision.entries(), b) <= 1e-12);
    CHECK(max_relative_deviation(cf.eta_hat, eta) <= 1e-8);
  }
}

TEST_CASE("closed_form_posterior examples") {
  const std::vector<Pull> empty;
  const ClosedFormPosterior prior = closed_form_posterior(empty, 0, 2);
  CHECK(prior.precision.entries() == DenseMatrix::identity(2));
  CHECK(prior.eta_hat == Vector(2));

  const std::vector<Pull> one = {{0, Vector{1, 0}, 2.0}};
  const ClosedFormPosterior post = closed_form_posterior(one, 0, 2);
  CHECK(max_abs_diff(post.precision.entries(), DenseMatrix{{2, 0}, {0, 1}}) == 0.0);
  CHECK(max_abs_diff(post.eta_hat, Vector{1, 0}) < 1e-15);

  const ClosedFormPosterior other = closed_form_posterior(one, 1, 2);
  CHECK(other.precision.entries() == DenseMatrix::identity(2));
  CHECK(other.eta_hat == Vector(2));
}

TEST_CASE("shared mode collapses onto one record") {
  RandomStream rng(42);
  const std::size_t n = 3, d = 3;
  PosteriorState s = ts_init(n, d, 1.0, true);
  std::vector<Pull> history;
  for (int k = 0; k < 100; ++k) {
    Pull p{rng.uniform_index(n), random_vector(d, rng), rng.normal()};
    ts_update(s, p.arm, p.y, p.reward);
    history.push_back(p);
  }
  const ClosedFormPosterior all = closed_form_posterior(history, 0, d, true);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(&s.arm(i) == &s.arm(0));
    CHECK(s.arm(i).pulls == 100);
    CHECK(max_relative_deviation(s.arm(i).eta_hat, all.eta_hat) <= 1e-8);
  }
}

TEST_CASE("zero draws reduce Thompson sampling to greedy") {
  RandomStream rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 5, d = 1 + trial % 4;
    const PosteriorState s = random_state(n, d, 30, rng);
    const auto y = random_ys(n, d, rng);
    const PolicyDecision ts = ts_decide_with_normals(s, y, zeros(n, d));
    const PolicyDecision g = greedy_decide(s, y);
    CHECK(ts.chosen == g.chosen);
    for (std::size_t i = 0; i < n; ++i) CHECK(ts.sampled_eta[i] == s.arm(i).eta_hat);
  }
}

TEST_CASE("symmetric prior picks each arm half the time") {
  const PosteriorState s = ts_init(2, 2, 1.0);
  const std::vector<Vector> y = {Vector{1, 1}, Vector{1, 1}};
  RandomStream rng(44);
  const int n = 10000;
  int first = 0;
  for (int k = 0; k < n; ++k) first += ts_decide(s, y, rng).chosen == 0 ? 1 : 0;
  CHECK(std::abs(first / double(n) - 0.5) <= 0.02);
}

TEST_CASE("large score gap with small posterior spread") {
  PosteriorState s = ts_init(2, 2, 0.1);
  ts_update(s, 0, Vector{1, 0}, 2.0);
  const std::vector<Vector> y = {Vector{10, 0}, Vector{0, 0}};
  REQUIRE(dot(y[0], s.arm(0).eta_hat) - dot(y[1], s.arm(1).eta_hat) == doctest::Approx(10.0));
  RandomStream rng(45);
  int first = 0;
  for (int k = 0; k < 10000; ++k) first += ts_decide(s, y, rng).chosen == 0 ? 1 : 0;
  CHECK(first >= 9990);
}

TEST_CASE("greedy examples") {
  const PosteriorState prior = ts_init(3, 2, 1.0);
  const auto y = std::vector<Vector>{Vector{1, 2}, Vector{3, 4}, Vector{5, 6}};
  const PolicyDecision d = greedy_decide(prior, y);
  CHECK(d.chosen == 0);
  for (double s : d.scores) CHECK(s == 0.0);

  PosteriorState s = ts_init(2, 2, 1.0);
  ts_update(s, 0, Vector{1, 0}, 2.0);
  CHECK(greedy_decide(s, std::vector<Vector>{Vector{1, 0}, Vector{5, 5}}).chosen == 0);
}

TEST_CASE("oracle examples") {
  CHECK(oracle_decide(std::vector<Vector>{Vector{1}}, std::vector<Vector>{Vector{-3}}).chosen == 0);
  RandomStream rng(46);
  ScenarioShape shape;
  shape.num_arms = 7;
  const Environment env = random_scenario(shape, rng);
  for (int t = 0; t < 100; ++t) {
    const Round r = sample_round(env, t, rng);
    const std::size_t chosen = oracle_decide(env.arms.eta, r.y).chosen;
    CHECK(chosen == r.optimal_arm);
    std::size_t best = 0;
    for (std::size_t i = 1; i < 7; ++i)
      if (dot(r.y[i], env.arms.eta[i]) > dot(r.y[best], env.arms.eta[best])) best = i;
    CHECK(chosen == best);
  }
}

TEST_CASE("greedy and oracle choices are scale invariant") {
  RandomStream rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const PosteriorState s = random_state(4, 3, 20, rng);
    auto y = random_ys(4, 3, rng);
    std::vector<Vector> eta;
    for (std::size_t i = 0; i < 4; ++i) eta.push_back(random_vector(3, rng));
    const std::size_t g = greedy_decide(s, y).chosen, o = oracle_decide(eta, y).chosen;
    for (Vector& v : y) v = 3.7 * v;
    CHECK(greedy_decide(s, y).chosen == g);
    CHECK(oracle_decide(eta, y).chosen == o);
  }
}

TEST_CASE("random_decide") {
  RandomStream rng(48);
  CHECK(random_decide(1, rng).chosen == 0);
  const int n = 10000, k = 4;
  std::array<int, k> counts{};
  for (int i = 0; i < n; ++i) ++counts[random_decide(k, rng).chosen];
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (int c : counts) CHECK(std::abs(c - n / 4.0) <= 3.0 * sd);
  RandomStream a(49), b(49);
  for (int i = 0; i < 100; ++i) CHECK(random_decide(5, a).chosen == random_decide(5, b).chosen);
}

TEST_CASE("regression oracle fit") {
  CHECK_THROWS_AS(regression_oracle_fit(std::vector<HindsightSample>{}), Error);

  const std::vector<HindsightSample> one = {{{Vector{1, 2}}, {3.0}}};
  const auto fit = regression_oracle_fit(one);
  // (I + y y^T)^{-1} y r = y r / (1 + |y|^2)
  CHECK(max_abs_diff(fit[0], Vector{0.5, 1.0}) < 1e-14);

  RandomStream rng(50);
  const std::vector<Vector> eta = {Vector{1, -2, 0.5}, Vector{0.3, 0.3, -1}};
  std::vector<HindsightSample> data, zero;
  for (int k = 0; k < 5000; ++k) {
    HindsightSample s;
    for (const Vector& e : eta) {
      s.y.push_back(random_vector(3, rng));
      s.reward.push_back(dot(s.y.back(), e));
    }
    data.push_back(s);
    s.reward.assign(2, 0.0);
    zero.push_back(s);
  }
  const auto est = regression_oracle_fit(data);
  for (std::size_t i = 0; i < 2; ++i) CHECK(max_abs_diff(est[i], eta[i]) < 1e-2);
  for (const Vector& v : regression_oracle_fit(zero)) CHECK(norm(v) == 0.0);
}
