#include "pobandit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pobandit/errors.hpp"

namespace pobandit {

namespace {

constexpr double kPivotTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;
constexpr int kJacobiMaxSweeps = 100;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::DimensionMismatch, what);
}

}  // namespace

bool Vector::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

double dot(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "dot: dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector operator+(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "vector +: dimensions differ");
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "vector -: dimensions differ");
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector operator*(double s, const Vector& a) {
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = s * a[i];
  return out;
}

void axpy(double s, const Vector& x, Vector& y) {
  require(x.dim() == y.dim(), "axpy: dimensions differ");
  for (std::size_t i = 0; i < x.dim(); ++i) y[i] += s * x[i];
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), a_(std::move(row_major)) {
  require(a_.size() == rows_ * cols_, "DenseMatrix: entry count != rows*cols");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "DenseMatrix: ragged initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(const Vector& d) {
  DenseMatrix m(d.dim(), d.dim());
  for (std::size_t i = 0; i < d.dim(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double x : a_) m = std::max(m, std::abs(x));
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); });
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix +: shapes differ");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + b(r, c);
  return out;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix -: shapes differ");
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - b(r, c);
  return out;
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  DenseMatrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = s * a(r, c);
  return out;
}

Vector operator*(const DenseMatrix& a, const Vector& x) {
  require(a.cols() == x.dim(), "matvec: dimensions differ");
  Vector out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
    out[r] = s;
  }
  return out;
}

Vector multiply_transposed(const DenseMatrix& a, const Vector& x) {
  require(a.rows() == x.dim(), "matvec^T: dimensions differ");
  Vector out(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    const double xr = x[r];
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] += row[c] * xr;
  }
  return out;
}

DenseMatrix outer(const Vector& a, const Vector& b) {
  DenseMatrix out(a.dim(), b.dim());
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t c = 0; c < b.dim(); ++c) out(r, c) = a[r] * b[c];
  return out;
}

double max_relative_deviation(const DenseMatrix& a, const DenseMatrix& b, double floor) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "deviation: shapes differ");
  double diff = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) diff = std::max(diff, std::abs(a(r, c) - b(r, c)));
  return diff / std::max(b.max_abs(), floor);
}

double max_relative_deviation(const Vector& a, const Vector& b, double floor) {
  require(a.dim() == b.dim(), "deviation: dimensions differ");
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(scale, floor);
}

// ---------------------------------------------------------------------------

LowerTriangular::LowerTriangular(DenseMatrix l) : l_(std::move(l)) {
  require(l_.rows() == l_.cols(), "LowerTriangular: not square");
}

DenseMatrix LowerTriangular::reconstruct() const {
  const std::size_t n = dim();
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += l_(i, k) * l_(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  return out;
}

Vector LowerTriangular::solve_lower(const Vector& b) const {
  require(b.dim() == dim(), "solve_lower: dimensions differ");
  const std::size_t n = dim();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = l_.row(i);
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= row[k] * x[k];
    x[i] = s / row[i];
  }
  return x;
}

Vector LowerTriangular::solve_upper(const Vector& b) const {
  require(b.dim() == dim(), "solve_upper: dimensions differ");
  const std::size_t n = dim();
  Vector x = b;
  // Column-oriented back substitution on L^T keeps row-major access.
  for (std::size_t ii = n; ii-- > 0;) {
    x[ii] /= l_(ii, ii);
    const auto row = l_.row(ii);
    for (std::size_t k = 0; k < ii; ++k) x[k] -= row[k] * x[ii];
  }
  return x;
}

void LowerTriangular::rank_one_update(Vector v) {
  require(v.dim() == dim(), "rank_one_update: dimensions differ");
  const std::size_t n = dim();
  for (std::size_t k = 0; k < n; ++k) {
    if (v[k] == 0.0) continue;
    const double lkk = l_(k, k);
    const double r = std::hypot(lkk, v[k]);
    const double c = r / lkk;
    const double s = v[k] / lkk;
    l_(k, k) = r;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double lik = (l_(i, k) + s * v[i]) / c;
      v[i] = c * v[i] - s * lik;
      l_(i, k) = lik;
    }
  }
}

LowerTriangular cholesky(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "cholesky: not square");
  const std::size_t n = m.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, m(i, i));
  const double tol = kPivotTolerance * max_diag;
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol) || !(max_diag > 0.0))
      throw Error(ErrorKind::NotPositiveDefinite, "cholesky: pivot " + std::to_string(j) +
                                                      " = " + std::to_string(d));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return LowerTriangular(std::move(l));
}

LowerTriangular rank_one_update(LowerTriangular chol, const Vector& v) {
  chol.rank_one_update(v);
  return chol;
}

// ---------------------------------------------------------------------------

SpdMatrix::SpdMatrix(DenseMatrix entries) : a_(std::move(entries)) {
  if (a_.rows() != a_.cols()) throw Error(ErrorKind::DimensionMismatch, "SpdMatrix: not square");
  if (!a_.all_finite()) throw Error(ErrorKind::InvalidArgument, "SpdMatrix: non-finite entry");
  const double scale = a_.max_abs();
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = i + 1; j < dim(); ++j) {
      if (std::abs(a_(i, j) - a_(j, i)) > kSymmetryTolerance * scale)
        throw Error(ErrorKind::InvalidArgument, "SpdMatrix: not symmetric");
      const double avg = 0.5 * (a_(i, j) + a_(j, i));
      a_(i, j) = avg;
      a_(j, i) = avg;
    }
  chol_ = cholesky(a_);
}

SpdMatrix SpdMatrix::identity(std::size_t n) { return SpdMatrix(DenseMatrix::identity(n)); }

DenseMatrix SpdMatrix::inverse() const {
  const std::size_t n = dim();
  DenseMatrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector e(n);
    e[c] = 1.0;
    const Vector col = chol_.solve(e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  // Exact symmetry for downstream SpdMatrix construction.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = avg;
      inv(j, i) = avg;
    }
  return inv;
}

void SpdMatrix::rank_one_update(const Vector& v) {
  require(v.dim() == dim(), "SpdMatrix::rank_one_update: dimensions differ");
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) a_(i, j) += v[i] * v[j];
  chol_.rank_one_update(v);
}

Vector solve_spd(const SpdMatrix& m, const Vector& b) { return m.solve(b); }

Vector sample_gaussian_from_normals(const Vector& mean, const LowerTriangular& precision_chol,
                                    double scale, const Vector& z) {
  require(mean.dim() == precision_chol.dim() && z.dim() == mean.dim(),
          "sample_gaussian: dimensions differ");
  Vector out = precision_chol.solve_upper(z);
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] = mean[i] + scale * out[i];
  return out;
}

Vector sample_gaussian(const Vector& mean, const LowerTriangular& precision_chol, double scale,
                       RandomStream& rng) {
  Vector z(mean.dim());
  rng.fill_normal(z.values());
  return sample_gaussian_from_normals(mean, precision_chol, scale, z);
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "eigenvalues: not square");
  const std::size_t n = m.rows();
  DenseMatrix a = m;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };
  double total = 0.0;
  for (double x : a.values()) total += x * x;
  const double target = 1e-14 * std::sqrt(total);

  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > kJacobiMaxSweeps)
      throw Error(ErrorKind::ConvergenceFailure, "Jacobi eigenvalue sweeps exhausted");
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double min_eigenvalue(const DenseMatrix& symmetric) {
  const auto eig = symmetric_eigenvalues(symmetric);
  return eig.empty() ? 0.0 : eig.front();
}

double min_eigenvalue(const SpdMatrix& m) { return min_eigenvalue(m.entries()); }

}  // namespace pobandit
