#pragma once

// Small dense linear algebra: vectors, row-major matrices, SPD matrices with
// a cached Cholesky factor, O(d^2) rank-one factor updates, and Gaussian
// sampling from precision factors. Sized for d up to a few hundred.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "pobandit/rng.hpp"

namespace pobandit {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
  Vector(std::initializer_list<double> values) : v_(values) {}
  explicit Vector(std::vector<double> values) : v_(std::move(values)) {}

  std::size_t dim() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool all_finite() const;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> v_;
};

double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);
// y += s * x
void axpy(double s, const Vector& x, Vector& y);

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(const Vector& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {a_.data() + r * cols_, cols_}; }
  std::span<const double> values() const { return a_; }

  DenseMatrix transpose() const;
  double max_abs() const;
  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);
Vector operator*(const DenseMatrix& a, const Vector& x);
// a^T x without forming the transpose.
Vector multiply_transposed(const DenseMatrix& a, const Vector& x);
DenseMatrix outer(const Vector& a, const Vector& b);
// max |a - b| / max(max|b|, floor)
double max_relative_deviation(const DenseMatrix& a, const DenseMatrix& b, double floor = 1e-300);
double max_relative_deviation(const Vector& a, const Vector& b, double floor = 1e-300);

/// Lower-triangular factor L, stored densely (upper part is zero).
class LowerTriangular {
 public:
  LowerTriangular() = default;
  explicit LowerTriangular(DenseMatrix l);
  static LowerTriangular identity(std::size_t n) { return LowerTriangular(DenseMatrix::identity(n)); }

  std::size_t dim() const { return l_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return l_(r, c); }
  const DenseMatrix& matrix() const { return l_; }

  /// L * L^T
  DenseMatrix reconstruct() const;
  /// Solves L x = b.
  Vector solve_lower(const Vector& b) const;
  /// Solves L^T x = b.
  Vector solve_upper(const Vector& b) const;
  /// Solves (L L^T) x = b.
  Vector solve(const Vector& b) const { return solve_upper(solve_lower(b)); }

  /// In-place factor update so that L L^T becomes L L^T + v v^T.
  void rank_one_update(Vector v);

 private:
  DenseMatrix l_;
};

/// Symmetric positive-definite matrix with its Cholesky factor. Construction
/// validates symmetry and factorizes; a matrix that exists is SPD.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(DenseMatrix entries);
  static SpdMatrix identity(std::size_t n);

  std::size_t dim() const { return a_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return a_(r, c); }
  const DenseMatrix& entries() const { return a_; }
  const LowerTriangular& chol() const { return chol_; }

  Vector solve(const Vector& b) const { return chol_.solve(b); }
  Vector operator*(const Vector& x) const { return a_ * x; }
  DenseMatrix inverse() const;

  /// A <- A + v v^T, refreshing the factor in O(dim^2).
  void rank_one_update(const Vector& v);

 private:
  DenseMatrix a_;
  LowerTriangular chol_;
};

/// Cholesky factorization. Throws Error(NotPositiveDefinite) if a pivot falls
/// below 1e-12 times the largest diagonal entry.
LowerTriangular cholesky(const DenseMatrix& m);
inline LowerTriangular cholesky(const SpdMatrix& m) { return m.chol(); }

/// Factor of L L^T + v v^T.
LowerTriangular rank_one_update(LowerTriangular chol, const Vector& v);

/// Solves m x = b.
Vector solve_spd(const SpdMatrix& m, const Vector& b);

/// Draws mean + scale * L^{-T} z with z standard normal, i.e. a sample of
/// N(mean, scale^2 (L L^T)^{-1}) when L factors a precision matrix.
Vector sample_gaussian(const Vector& mean, const LowerTriangular& precision_chol, double scale,
                       RandomStream& rng);
/// Same map with the standard normals supplied by the caller.
Vector sample_gaussian_from_normals(const Vector& mean, const LowerTriangular& precision_chol,
                                    double scale, const Vector& z);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
/// Throws Error(ConvergenceFailure) if the sweep cap is reached.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& m);
double min_eigenvalue(const SpdMatrix& m);
double min_eigenvalue(const DenseMatrix& symmetric);

}  // namespace pobandit
