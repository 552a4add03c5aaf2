#pragma once

// Small dense linear algebra for finite-state models. State counts are tiny,
// so everything is row-major std::vector storage and O(n^3) kernels.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmtight {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix& operator+=(const Matrix& o) {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("matrix shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// y = A x
inline Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

/// y = xᵀ A, i.e. a row vector pushed forward one step.
inline Vector multiply(std::span<const double> x, const Matrix& a) {
  if (a.rows() != x.size()) throw std::invalid_argument("vector-matrix shape mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += x[i] * a(i, j);
  }
  return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

inline double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Max absolute row sum, an upper bound on the spectral radius.
inline double inf_norm(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double r = 0.0;
    for (double v : a.row(i)) r += std::abs(v);
    m = std::max(m, r);
  }
  return m;
}

class Singular : public std::domain_error {
 public:
  explicit Singular(std::size_t pivot)
      : std::domain_error("singular matrix at pivot " + std::to_string(pivot)), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

inline constexpr double kPivotThreshold = 1e-12;

/// Solves A y = b by Gaussian elimination with partial pivoting.
inline Vector solve_linear(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) < kPivotThreshold) throw Singular(k);
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector y(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= a(k, j) * y[j];
    y[k] = acc / a(k, k);
  }
  return y;
}

/// (Σ_{k=0}^{K} P^k) t, by K multiply-accumulate passes.
inline Vector neumann_partial_sum(const Matrix& p, const Vector& t, std::size_t terms) {
  if (!p.square() || p.rows() != t.size())
    throw std::invalid_argument("neumann_partial_sum: shape mismatch");
  Vector acc = t;
  Vector power = t;
  for (std::size_t k = 0; k < terms; ++k) {
    power = multiply(p, power);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += power[i];
  }
  return acc;
}

struct SpectralRadius {
  double estimate = 0.0;
  /// Max absolute row sum; always ≥ the true spectral radius.
  double inf_norm_bound = 0.0;
};

inline constexpr std::size_t kPowerIterations = 500;

/// Power iteration on |P| from a random positive start vector.
///
/// The estimate is the geometric-mean growth rate over the final 60 steps,
/// which also settles for periodic matrices of period up to 6, capped by the
/// row-sum bound.
inline SpectralRadius spectral_radius_estimate(const Matrix& p,
                                               std::size_t iters = kPowerIterations,
                                               std::uint64_t seed = 0x5eed) {
  if (!p.square()) throw std::invalid_argument("spectral_radius_estimate: matrix not square");
  const std::size_t n = p.rows();
  Matrix abs_p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) abs_p(i, j) = std::abs(p(i, j));

  SpectralRadius out;
  out.inf_norm_bound = inf_norm(abs_p);
  if (n == 0 || out.inf_norm_bound == 0.0) return out;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector x(n);
  for (auto& v : x) v = unif(rng);

  const std::size_t window = std::min<std::size_t>(60, std::max<std::size_t>(iters, 1));
  std::vector<double> log_growth;
  log_growth.reserve(iters);
  for (std::size_t k = 0; k < iters; ++k) {
    x = multiply(abs_p, x);
    const double norm = inf_norm(x);
    if (norm == 0.0) return out;  // nilpotent on the start vector
    for (auto& v : x) v /= norm;
    log_growth.push_back(std::log(norm));
  }
  double acc = 0.0;
  for (std::size_t k = log_growth.size() - window; k < log_growth.size(); ++k) acc += log_growth[k];
  out.estimate = std::min(std::exp(acc / static_cast<double>(window)), out.inf_norm_bound);
  return out;
}

}  // namespace lmtight
