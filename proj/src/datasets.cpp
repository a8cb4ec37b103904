#include "pobandit/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "pobandit/errors.hpp"

namespace pobandit {

namespace {

constexpr double kVarianceFloor = 1e-12;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Standardization Standardization::fit(const std::vector<Vector>& rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptyDataset, "cannot standardize an empty table");
  const std::size_t d = rows.front().dim();
  Standardization s{Vector(d), Vector(d, 1.0)};
  const double n = static_cast<double>(rows.size());
  for (const Vector& r : rows) axpy(1.0 / n, r, s.mean);
  for (std::size_t j = 0; j < d; ++j) {
    double var = 0.0;
    for (const Vector& r : rows) var += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    var /= n;
    if (var < kVarianceFloor) {
      // Degenerate column: centre on an observed value so it maps to exactly 0.
      s.mean[j] = rows.front()[j];
      s.scale[j] = 1.0;
    } else {
      s.scale[j] = std::sqrt(var);
    }
  }
  return s;
}

Vector Standardization::apply(const Vector& row) const {
  Vector out(row.dim());
  for (std::size_t j = 0; j < row.dim(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

LabeledDataset parse_csv(std::istream& in, std::string_view label_column, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](ErrorKind kind, const std::string& msg) {
    throw Error(kind, std::string(source) + ":" + std::to_string(line_no) + ": " + msg);
  };

  // Header.
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) fail(ErrorKind::EmptyDataset, "no header row");
  const auto header = split_commas(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) fail(ErrorKind::MissingLabel, "label column '" + std::string(label_column) + "' not in header");
  const std::size_t label_idx = static_cast<std::size_t>(label_it - header.begin());

  LabeledDataset data;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) data.feature_names.emplace_back(header[c]);
  data.d_x = data.feature_names.size();
  if (data.d_x == 0) fail(ErrorKind::ParseError, "no feature columns");

  std::vector<Vector> raw;
  std::vector<std::string> raw_labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      fail(ErrorKind::ParseError, "expected " + std::to_string(header.size()) + " columns, got " +
                                      std::to_string(cells.size()));
    Vector row(data.d_x);
    std::size_t j = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_idx) continue;
      if (!parse_double(cells[c], row[j]))
        fail(ErrorKind::NonNumericFeature, "column " + std::to_string(c + 1) + " ('" + std::string(header[c]) +
                                               "') is not a finite number: '" + std::string(cells[c]) + "'");
      ++j;
    }
    if (cells[label_idx].empty()) fail(ErrorKind::MissingLabel, "empty label cell");
    raw.push_back(std::move(row));
    raw_labels.emplace_back(cells[label_idx]);
  }
  if (raw.empty()) throw Error(ErrorKind::EmptyDataset, std::string(source) + ": header only, no data rows");

  std::vector<std::string> classes = raw_labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw Error(ErrorKind::InvalidArgument, std::string(source) + ": need at least 2 classes");
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < classes.size(); ++k) index[classes[k]] = k;

  data.standardization = Standardization::fit(raw);
  data.features.reserve(raw.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    data.features.push_back(data.standardization.apply(raw[r]));
    data.labels.push_back(index.at(raw_labels[r]));
  }
  data.class_names = std::move(classes);
  data.num_classes = data.class_names.size();
  return data;
}

LabeledDataset load_csv(const std::filesystem::path& path, std::string_view label_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return parse_csv(in, label_column, path.string());
}

std::string_view to_string(RewardMode mode) {
  return mode == RewardMode::logistic ? "logistic" : "simple_linear";
}

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "logistic") return RewardMode::logistic;
  if (text == "simple_linear" || text == "simple") return RewardMode::simple_linear;
  throw Error(ErrorKind::InvalidConfig, "unknown reward mode '" + std::string(text) + "'");
}

LogisticFit fit_logistic(const std::vector<Vector>& x, const std::vector<double>& target, double ridge, double tol,
                         std::size_t max_iter) {
  if (x.empty() || x.size() != target.size()) throw Error(ErrorKind::EmptyDataset, "logistic fit needs data");
  const std::size_t d = x.front().dim();
  const double n = static_cast<double>(x.size());

  auto objective = [&](const Vector& w) {
    double ll = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r) {
      const double z = dot(x[r], w);
      // log sigma(z) = -log(1+e^{-z})
      const double log_p = -std::log1p(std::exp(-std::abs(z))) + std::min(z, 0.0);
      const double log_q = -std::log1p(std::exp(-std::abs(z))) + std::min(-z, 0.0);
      ll += target[r] * log_p + (1.0 - target[r]) * log_q;
    }
    return ll / n - 0.5 * ridge * dot(w, w);
  };

  LogisticFit fit{Vector(d), 0.0, 0};
  double current = objective(fit.coef);
  for (std::size_t iter = 0;; ++iter) {
    Vector grad = (-ridge) * fit.coef;
    DenseMatrix hess = ridge * DenseMatrix::identity(d);
    for (std::size_t r = 0; r < x.size(); ++r) {
      const double p = sigmoid(dot(x[r], fit.coef));
      axpy((target[r] - p) / n, x[r], grad);
      const double w = p * (1.0 - p) / n;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) hess(i, j) += w * x[r][i] * x[r][j];
    }
    fit.grad_norm = norm(grad);
    fit.iterations = iter;
    if (fit.grad_norm <= tol) return fit;
    if (iter >= max_iter)
      throw Error(ErrorKind::NonConvergence,
                  "logistic fit: gradient norm " + std::to_string(fit.grad_norm) + " after " +
                      std::to_string(max_iter) + " iterations");
    const Vector step = SpdMatrix(std::move(hess)).solve(grad);
    // Backtracking keeps every step an ascent step.
    double t = 1.0;
    Vector next = fit.coef + step;
    double value = objective(next);
    while (value < current && t > 1e-10) {
      t *= 0.5;
      next = fit.coef + t * step;
      value = objective(next);
    }
    fit.coef = std::move(next);
    current = value;
  }
}

RewardSynthesis fit_reward_params(const LabeledDataset& data, RewardMode mode, double noise_scale, double ridge) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "fit_reward_params: empty dataset");
  RewardSynthesis syn;
  syn.mode = mode;
  syn.noise_scale = noise_scale;
  const std::size_t d = data.d_x;
  const double n = static_cast<double>(data.size());

  if (mode == RewardMode::logistic) {
    std::vector<double> target(data.size());
    for (std::size_t k = 0; k < data.num_classes; ++k) {
      for (std::size_t r = 0; r < data.size(); ++r) target[r] = data.labels[r] == k ? 1.0 : 0.0;
      syn.mu.push_back(fit_logistic(data.features, target, ridge).coef);
    }
    return syn;
  }

  DenseMatrix gram = (ridge * n) * DenseMatrix::identity(d);
  for (const Vector& row : data.features)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) gram(i, j) += row[i] * row[j];
  const SpdMatrix normal(std::move(gram));
  for (std::size_t k = 0; k < data.num_classes; ++k) {
    Vector rhs(d);
    for (std::size_t r = 0; r < data.size(); ++r)
      if (data.labels[r] == k) axpy(1.0, data.features[r], rhs);
    syn.mu.push_back(normal.solve(rhs));
  }
  return syn;
}

DenseMatrix make_sensing(std::size_t d_x, std::size_t d_y, RandomStream& rng) {
  if (d_y == 0 || d_y > d_x) throw Error(ErrorKind::InvalidDims, "make_sensing needs 1 <= d_y <= d_x");
  std::vector<std::size_t> cols(d_x);
  std::iota(cols.begin(), cols.end(), 0);
  for (std::size_t i = d_x; i > 1; --i) std::swap(cols[i - 1], cols[rng.uniform_index(i)]);
  DenseMatrix a(d_y, d_x);
  for (std::size_t k = 0; k < d_x; ++k) {
    const std::size_t row = k < d_y ? k : rng.uniform_index(d_y);
    a(row, cols[k]) = 1.0;
  }
  return a;
}

RoundStream::RoundStream(const LabeledDataset& data, const RewardSynthesis& synthesis, DenseMatrix sensing,
                         double noise_variance, RandomStream rng)
    : data_(&data),
      synthesis_(&synthesis),
      sensing_(std::move(sensing)),
      noise_sd_(std::sqrt(noise_variance)),
      rng_(rng) {
  if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "RoundStream: empty dataset");
  if (sensing_.cols() != data.d_x) throw Error(ErrorKind::DimensionMismatch, "RoundStream: sensing has wrong width");
  if (noise_variance < 0.0) throw Error(ErrorKind::InvalidArgument, "RoundStream: negative noise variance");
}

LabeledRound RoundStream::next() {
  LabeledRound r;
  r.t = ++t_;
  r.row = rng_.uniform_index(data_->size());
  r.label = data_->labels[r.row];
  r.x = data_->features[r.row];
  const Vector ax = sensing_ * r.x;
  r.y.reserve(num_arms());
  for (std::size_t i = 0; i < num_arms(); ++i) {
    Vector yi = ax;
    if (noise_sd_ > 0.0)
      for (double& v : yi) v += noise_sd_ * rng_.normal();
    r.y.push_back(std::move(yi));
  }
  return r;
}

double RoundStream::reward(const LabeledRound& round, std::size_t arm, RandomStream& rng) const {
  const double mean = dot(round.x, synthesis_->mu.at(arm));
  return synthesis_->noise_scale > 0.0 ? mean + synthesis_->noise_scale * rng.normal() : mean;
}

std::vector<HindsightSample> hindsight_samples(const LabeledDataset& data, const RewardSynthesis& synthesis,
                                               const DenseMatrix& sensing, double noise_variance,
                                               RandomStream& rng) {
  const double sd = std::sqrt(noise_variance);
  std::vector<HindsightSample> out;
  out.reserve(data.size());
  for (const Vector& x : data.features) {
    HindsightSample s;
    const Vector ax = sensing * x;
    for (std::size_t i = 0; i < synthesis.mu.size(); ++i) {
      Vector yi = ax;
      if (sd > 0.0)
        for (double& v : yi) v += sd * rng.normal();
      s.y.push_back(std::move(yi));
      double r = dot(x, synthesis.mu[i]);
      if (synthesis.noise_scale > 0.0) r += synthesis.noise_scale * rng.normal();
      s.reward.push_back(r);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pobandit
