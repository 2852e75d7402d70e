#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace fgsgd {

/// Dense row-major matrix of doubles.
///
/// Sized for the small kernels and weight blocks handled by the optimizer
/// (a few hundred entries per side at most). Construction from explicit
/// entries rejects NaN/Inf; arithmetic results are not re-validated.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transpose() const;
  double frobenius_norm() const;
  double squared_norm() const;
  double column_norm(std::size_t c) const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Frobenius inner product <a, b> = tr(a^T b).
double dot(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Symmetric and skew parts, (X + X^T)/2 and (X - X^T)/2.
Matrix sym(const Matrix& x);
Matrix skew(const Matrix& x);

// Solve a X = b for square a by LU with partial pivoting.
Matrix solve(const Matrix& a, const Matrix& b);

/// Thin QR factor of an A x B matrix (A >= B) with the sign convention
/// diag(R) > 0, so the result is unique.
///
/// Throws RankDeficientError naming the first column whose residual norm
/// after Householder elimination is <= 1e-12 * max(1, |M|_F).
Matrix qr_orthonormal(const Matrix& m);

/// Largest singular value by power iteration on M^T M.
///
/// Starts from the normalized all-ones vector and stops once successive
/// estimates agree to 1e-12 (relative) or after 10000 iterations. A start
/// vector annihilated by M^T M is replaced by a fixed pseudo-random one.
double top_singular_value(const Matrix& m);

/// exp(M) by scaling and squaring with a diagonal [6/6] Pade approximant.
Matrix matrix_exp(const Matrix& m);

Matrix random_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed);
Matrix random_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

}  // namespace fgsgd
