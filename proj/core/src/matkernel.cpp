#include "fgsgd/matkernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

double one_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: expected " + std::to_string(rows_ * cols_) + " entries, got " +
                     std::to_string(data_.size()));
  }
  if (!all_finite()) throw ValueError("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(entries));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

double Matrix::frobenius_norm() const { return std::sqrt(squared_norm()); }

double Matrix::column_norm(std::size_t c) const {
  double s = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c) * (*this)(r, c);
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: row counts " + std::to_string(a.rows()) + " and " +
                     std::to_string(b.rows()));
  }
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * b(k, j);
    }
  return out;
}

double dot(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s;
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.values()) best = std::max(best, std::abs(v));
  return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) best = std::max(best, std::abs(av[i] - bv[i]));
  return best;
}

Matrix sym(const Matrix& x) {
  if (x.rows() != x.cols()) throw ShapeError("sym: matrix is not square");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = 0.5 * (x(i, j) + x(j, i));
  return out;
}

Matrix skew(const Matrix& x) {
  if (x.rows() != x.cols()) throw ShapeError("skew: matrix is not square");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = 0.5 * (x(i, j) - x(j, i));
  return out;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ShapeError("solve: matrix is not square");
  if (b.rows() != n) throw ShapeError("solve: right-hand side has wrong row count");
  Matrix lu = a;
  Matrix x = b;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (lu(piv, k) == 0.0) throw ValueError("solve: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = x(k, j);
      for (std::size_t i = k + 1; i < n; ++i) s -= lu(k, i) * x(i, j);
      x(k, j) = s / lu(k, k);
    }
  }
  return x;
}

Matrix qr_orthonormal(const Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows < cols) {
    throw ShapeError("qr_orthonormal: need rows >= cols, got " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  const double tol = 1e-12 * std::max(1.0, m.frobenius_norm());

  // Householder reflectors are stored in the lower part of `work`, R on and above the diagonal.
  Matrix work = m;
  std::vector<double> beta(cols, 0.0);
  std::vector<double> rdiag(cols, 0.0);
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm += work(i, k) * work(i, k);
    norm = std::sqrt(norm);
    if (norm <= tol) {
      throw RankDeficientError(k, "qr_orthonormal: column " + std::to_string(k) +
                                      " is linearly dependent on the preceding columns");
    }
    const double alpha = work(k, k) > 0.0 ? -norm : norm;
    const double v0 = work(k, k) - alpha;
    work(k, k) = v0;
    double vnorm2 = v0 * v0;
    for (std::size_t i = k + 1; i < rows; ++i) vnorm2 += work(i, k) * work(i, k);
    beta[k] = vnorm2 > 0.0 ? 2.0 / vnorm2 : 0.0;
    rdiag[k] = alpha;
    for (std::size_t j = k + 1; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < rows; ++i) s += work(i, k) * work(i, j);
      s *= beta[k];
      for (std::size_t i = k; i < rows; ++i) work(i, j) -= s * work(i, k);
    }
  }

  // Accumulate the thin Q = H_0 ... H_{B-1} [I; 0].
  Matrix q(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) q(j, j) = 1.0;
  for (std::size_t k = cols; k-- > 0;) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < rows; ++i) s += work(i, k) * q(i, j);
      s *= beta[k];
      for (std::size_t i = k; i < rows; ++i) q(i, j) -= s * work(i, k);
    }
  }

  // Flip columns so that diag(R) > 0.
  for (std::size_t j = 0; j < cols; ++j) {
    if (rdiag[j] < 0.0) {
      for (std::size_t i = 0; i < rows; ++i) q(i, j) = -q(i, j);
    }
  }
  return q;
}

double top_singular_value(const Matrix& m) {
  const std::size_t n = m.cols();
  if (m.size() == 0) return 0.0;
  const double fro2 = m.squared_norm();
  if (fro2 == 0.0) return 0.0;

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> mx(m.rows());
  std::vector<double> y(n);

  auto apply = [&](const std::vector<double>& in) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += m(r, c) * in[c];
      mx[r] = s;
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < n; ++c) y[c] += m(r, c) * mx[r];
  };
  auto norm_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };

  bool restarted = false;
  double estimate = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    apply(x);
    const double sigma = norm_of(mx);  // |M x| with |x| = 1
    const double ynorm = norm_of(y);
    if (ynorm <= 1e-300 || ynorm <= 1e-14 * fro2) {
      if (restarted) return sigma;
      // Start vector lies in the null space of M^T M; use a fixed irregular vector instead.
      restarted = true;
      std::mt19937_64 rng(0x5eed5eedULL);
      std::normal_distribution<double> gauss;
      for (double& e : x) e = gauss(rng);
      const double xn = norm_of(x);
      for (double& e : x) e /= xn;
      estimate = 0.0;
      continue;
    }
    if (iter > 0 && std::abs(sigma - estimate) <= 1e-12 * sigma) return sigma;
    estimate = sigma;
    for (std::size_t c = 0; c < n; ++c) x[c] = y[c] / ynorm;
  }
  return estimate;
}

Matrix matrix_exp(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw ShapeError("matrix_exp: matrix is not square");
  if (n == 0) return m;

  // Scale so that |X|_1 <= 0.5; the [6/6] Pade truncation error is then far below 1e-16.
  const double norm = one_norm(m);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix x = m * std::ldexp(1.0, -squarings);

  // Pade [6/6] coefficients c_k = (2p-k)! p! / ((2p)! k! (p-k)!) with p = 6.
  constexpr double c[7] = {1.0,
                           1.0 / 2.0,
                           5.0 / 44.0,
                           1.0 / 66.0,
                           1.0 / 792.0,
                           1.0 / 15840.0,
                           1.0 / 665280.0};
  const Matrix eye = Matrix::identity(n);
  Matrix power = eye;
  Matrix num = eye;
  Matrix den = eye;
  for (int k = 1; k <= 6; ++k) {
    power = matmul(power, x);
    num += c[k] * power;
    den += ((k % 2 == 0) ? c[k] : -c[k]) * power;
  }
  Matrix result = solve(den, num);
  for (int i = 0; i < squarings; ++i) result = matmul(result, result);
  return result;
}

Matrix random_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> entries(rows * cols);
  for (double& e : entries) e = gauss(rng);
  return Matrix(rows, cols, std::move(entries));
}

Matrix random_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_gaussian(rows, cols, rng);
}

}  // namespace fgsgd
