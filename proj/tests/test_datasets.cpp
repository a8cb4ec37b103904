#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pobandit/datasets.hpp"
#include "pobandit/errors.hpp"
#include "support.hpp"

using namespace pobandit;
using namespace testing;

namespace {

ErrorKind parse_error(const std::string& text, const std::string& label = "label") {
  std::istringstream in(text);
  try {
    parse_csv(in, label);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

std::size_t rank_of(DenseMatrix m) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t p = rank;
    for (std::size_t r = rank; r < m.rows(); ++r)
      if (std::abs(m(r, c)) > std::abs(m(p, c))) p = r;
    if (std::abs(m(p, c)) < 1e-12) continue;
    for (std::size_t k = 0; k < m.cols(); ++k) std::swap(m(rank, k), m(p, k));
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      const double f = m(r, c) / m(rank, c);
      for (std::size_t k = 0; k < m.cols(); ++k) m(r, k) -= f * m(rank, k);
    }
    ++rank;
  }
  return rank;
}

LabeledDataset small_dataset() {
  std::istringstream in("a,b,label\n1,2,x\n3,5,y\n2,0,x\n4,1,y\n");
  return parse_csv(in, "label");
}

}  // namespace

TEST_CASE("parse a small CSV") {
  std::istringstream in("f1,label,f2\n1.0,cat,2\n2.0,dog,3\n3.0,cat,7\n");
  const LabeledDataset d = parse_csv(in, "label");
  CHECK(d.d_x == 2);
  CHECK(d.num_classes == 2);
  CHECK(d.size() == 3);
  CHECK(d.class_names == std::vector<std::string>{"cat", "dog"});
  CHECK(d.labels == std::vector<std::size_t>{0, 1, 0});
  CHECK(d.feature_names == std::vector<std::string>{"f1", "f2"});
  // Standardized: column mean 0, population variance 1.
  double m = 0.0, v = 0.0;
  for (const Vector& x : d.features) m += x[0] / 3.0;
  for (const Vector& x : d.features) v += (x[0] - m) * (x[0] - m) / 3.0;
  CHECK(std::abs(m) < 1e-15);
  CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("constant feature column standardizes to zero") {
  std::istringstream in("f1,f2,label\n5,1,a\n5,2,b\n5,4,a\n");
  const LabeledDataset d = parse_csv(in, "label");
  for (const Vector& x : d.features) {
    CHECK(x[0] == 0.0);
    CHECK(std::isfinite(x[1]));
  }
}

TEST_CASE("CSV errors") {
  CHECK(parse_error("a,b,label\n") == ErrorKind::EmptyDataset);
  CHECK(parse_error("a,b\n1,2\n") == ErrorKind::MissingLabel);
  CHECK(parse_error("a,label\n1,\n2,x\n") == ErrorKind::MissingLabel);
  CHECK(parse_error("a,label\n1,x\nfoo,y\n") == ErrorKind::NonNumericFeature);
  CHECK(parse_error("a,label\n1,x\nnan,y\n") == ErrorKind::NonNumericFeature);
  CHECK(parse_error("a,label\n1,x\n2,y,3\n") == ErrorKind::ParseError);
  CHECK(parse_error("a,label\n1,x\n2,x\n") == ErrorKind::InvalidArgument);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "label"), Error);
}

TEST_CASE("logistic fit stays finite on separable data") {
  std::vector<Vector> x;
  std::vector<double> target;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    x.push_back(Vector{double(i)});
    target.push_back(i > 0 ? 1.0 : 0.0);
  }
  const LogisticFit fit = fit_logistic(x, target);
  CHECK(std::isfinite(fit.coef[0]));
  CHECK(fit.coef[0] > 0.0);
  CHECK(fit.grad_norm <= 1e-6);
}

TEST_CASE("logistic fit recovers a known parameter") {
  RandomStream rng(60);
  const Vector mu{1.0, -0.5, 0.25};
  std::vector<Vector> x;
  std::vector<double> target;
  for (int i = 0; i < 10000; ++i) {
    x.push_back(random_vector(3, rng));
    const double p = 1.0 / (1.0 + std::exp(-dot(x.back(), mu)));
    target.push_back(rng.uniform() < p ? 1.0 : 0.0);
  }
  const LogisticFit fit = fit_logistic(x, target);
  CHECK(norm(fit.coef - mu) <= 0.10 * norm(mu));
}

TEST_CASE("simple linear mode matches the normal equations") {
  // Orthonormal-column design (columns of a scaled Hadamard), balanced labels.
  LabeledDataset d;
  const double h[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (int r = 0; r < 4; ++r) d.features.push_back(Vector{h[r][0] / 2, h[r][1] / 2});
  d.labels = {0, 0, 1, 1};
  d.d_x = 2;
  d.num_classes = 2;
  const double ridge = 1e-4;
  const RewardSynthesis syn = fit_reward_params(d, RewardMode::simple_linear, 0.1, ridge);
  // X^T X = I, so mu_k = X^T 1(l=k) / (1 + ridge n).
  for (std::size_t k = 0; k < 2; ++k) {
    Vector expected(2);
    for (std::size_t r = 0; r < 4; ++r)
      if (d.labels[r] == k)
        for (std::size_t j = 0; j < 2; ++j) expected[j] += d.features[r][j];
    expected = (1.0 / (1.0 + ridge * 4)) * expected;
    CHECK(max_abs_diff(syn.mu[k], expected) < 1e-12);
  }
  CHECK(syn.noise_scale == 0.1);
}

TEST_CASE("logistic mode fits one parameter per class") {
  const LabeledDataset d = small_dataset();
  const RewardSynthesis syn = fit_reward_params(d, RewardMode::logistic);
  CHECK(syn.mu.size() == 2);
  for (const Vector& m : syn.mu) CHECK(m.all_finite());
}

TEST_CASE("sensing matrices") {
  RandomStream rng(61);
  const DenseMatrix perm = make_sensing(5, 5, rng);
  for (std::size_t r = 0; r < 5; ++r) {
    double row = 0.0, col = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
      row += perm(r, c);
      col += perm(c, r);
    }
    CHECK(row == 1.0);
    CHECK(col == 1.0);
  }

  const DenseMatrix small = make_sensing(4, 2, rng);
  for (std::size_t c = 0; c < 4; ++c) CHECK(small(0, c) + small(1, c) == 1.0);
  CHECK(rank_of(small) == 2);

  const DenseMatrix eye = make_sensing(26, 13, rng);
  double total = 0.0;
  for (double v : eye.values()) {
    CHECK((v == 0.0 || v == 1.0));
    total += v;
  }
  CHECK(total == 26.0);
  CHECK(rank_of(eye) == 13);

  CHECK_THROWS_AS(make_sensing(3, 4, rng), Error);
  CHECK_THROWS_AS(make_sensing(3, 0, rng), Error);
}

TEST_CASE("noise-free stream with a permutation recovers the context") {
  const LabeledDataset d = small_dataset();
  const RewardSynthesis syn{RewardMode::simple_linear, {Vector{1, 0}, Vector{0, 1}}, 0.0};
  RandomStream rng(62);
  const DenseMatrix a = make_sensing(2, 2, rng);
  RoundStream stream(d, syn, a, 0.0, RandomStream(63));
  for (int k = 0; k < 20; ++k) {
    const LabeledRound r = stream.next();
    CHECK(r.x == d.features[r.row]);
    CHECK(r.label == d.labels[r.row]);
    for (const Vector& y : r.y) CHECK(y == a * r.x);
    CHECK(stream.reward(r, 1, rng) == r.x[1]);
  }
}

TEST_CASE("stream labels follow class proportions") {
  std::ostringstream csv;
  csv << "f,label\n";
  for (int i = 0; i < 10; ++i) csv << i << "," << (i < 3 ? "a" : "b") << "\n";
  std::istringstream in(csv.str());
  const LabeledDataset d = parse_csv(in, "label");
  const RewardSynthesis syn{RewardMode::simple_linear, {Vector{1}, Vector{-1}}, 0.1};
  RoundStream stream(d, syn, DenseMatrix::identity(1), 0.1, RandomStream(64));
  const int n = 100000;
  int a = 0;
  for (int k = 0; k < n; ++k) a += stream.next().label == 0 ? 1 : 0;
  CHECK(std::abs(a - 0.3 * n) <= 3.0 * std::sqrt(n * 0.3 * 0.7));
}

TEST_CASE("streams are reproducible") {
  const LabeledDataset d = small_dataset();
  const RewardSynthesis syn = fit_reward_params(d, RewardMode::simple_linear);
  RandomStream rng(65);
  const DenseMatrix a = make_sensing(2, 1, rng);
  RoundStream s1(d, syn, a, 0.1, RandomStream(66)), s2(d, syn, a, 0.1, RandomStream(66));
  for (int k = 0; k < 50; ++k) {
    const LabeledRound r1 = s1.next(), r2 = s2.next();
    CHECK(r1.row == r2.row);
    CHECK(r1.y == r2.y);
  }
}

TEST_CASE("hindsight samples cover every row and arm") {
  const LabeledDataset d = small_dataset();
  const RewardSynthesis syn = fit_reward_params(d, RewardMode::simple_linear);
  RandomStream rng(67);
  const auto samples = hindsight_samples(d, syn, DenseMatrix::identity(2), 0.1, rng);
  CHECK(samples.size() == d.size());
  for (const auto& s : samples) {
    CHECK(s.y.size() == 2);
    CHECK(s.reward.size() == 2);
  }
}

TEST_CASE("bundled stand-in datasets load") {
  const LabeledDataset egg = load_csv(std::filesystem::path(POBANDIT_DATA_DIR) / "egg_standin.csv", "label");
  CHECK(egg.d_x == 14);
  CHECK(egg.num_classes == 2);
  const LabeledDataset eye = load_csv(std::filesystem::path(POBANDIT_DATA_DIR) / "eye_standin.csv", "label");
  CHECK(eye.d_x == 26);
  CHECK(eye.num_classes == 3);
}

TEST_CASE("standardization is idempotent") {
  const LabeledDataset d = load_csv(std::filesystem::path(POBANDIT_DATA_DIR) / "egg_standin.csv", "label");
  const Standardization again = Standardization::fit(d.features);
  for (const Vector& x : d.features) CHECK(max_abs_diff(again.apply(x), x) <= 1e-12);
}

TEST_CASE("sensing rows have disjoint supports") {
  RandomStream rng(68);
  for (std::size_t dy = 1; dy <= 9; ++dy) {
    const DenseMatrix a = make_sensing(9, dy, rng);
    const DenseMatrix g = a * a.transpose();
    for (std::size_t i = 0; i < dy; ++i) {
      CHECK(g(i, i) >= 1.0);
      for (std::size_t j = 0; j < dy; ++j)
        if (i != j) CHECK(g(i, j) == 0.0);
    }
  }
}

TEST_CASE("identity sensing without noise observes the context") {
  const LabeledDataset d = small_dataset();
  const RewardSynthesis syn{RewardMode::simple_linear, {Vector{1, 0}, Vector{0, 1}}, 0.0};
  RoundStream stream(d, syn, DenseMatrix::identity(2), 0.0, RandomStream(69));
  for (int k = 0; k < 10; ++k) {
    const LabeledRound r = stream.next();
    for (const Vector& y : r.y) CHECK(y == r.x);
  }
}
