#pragma once

// Small dense symmetric matrices, Cholesky factors and the multivariate
// normal log-density. Dimensions are small (d <= kMaxDim); everything is
// evaluated in log space.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace pmle {

inline constexpr std::size_t kMaxDim = 16;

using Vector = std::vector<double>;

/// Symmetric d x d matrix. Only the lower triangle is stored; reads of the
/// upper triangle mirror it, so the value is symmetric by construction.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(std::size_t dim);

  static SpdMatrix identity(std::size_t dim);
  static SpdMatrix diagonal(std::span<const double> diag);
  static SpdMatrix diagonal(std::initializer_list<double> diag);
  /// Builds from a full row-major matrix; throws PreconditionViolated if it
  /// is not symmetric within 1e-12 relative tolerance.
  static SpdMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SpdMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return i >= j ? packed_[index(i, j)] : packed_[index(j, i)];
  }
  /// Sets entry (i, j) and therefore (j, i).
  void set(std::size_t i, std::size_t j, double value) noexcept {
    if (i >= j) {
      packed_[index(i, j)] = value;
    } else {
      packed_[index(j, i)] = value;
    }
  }

  std::vector<std::vector<double>> to_rows() const;
  std::span<const double> packed() const noexcept { return packed_; }

  SpdMatrix scaled(double factor) const;
  double trace() const noexcept;
  double max_abs() const noexcept;

  friend bool operator==(const SpdMatrix&, const SpdMatrix&) = default;

 private:
  static constexpr std::size_t index(std::size_t i, std::size_t j) noexcept {
    return i * (i + 1) / 2 + j;
  }

  std::size_t dim_ = 0;
  std::vector<double> packed_;
};

/// Lower-triangular factor L with m = L * L^T.
class CholeskyFactor {
 public:
  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return i >= j ? packed_[i * (i + 1) / 2 + j] : 0.0;
  }

  /// log |m| = 2 * sum log L_ii.
  double log_det() const noexcept { return log_det_; }

  /// Solves L y = b in place.
  void solve_lower(std::span<double> b) const noexcept;
  /// (x - mu)^T m^{-1} (x - mu) through one forward substitution.
  double mahalanobis_sq(std::span<const double> x, std::span<const double> mu) const;
  /// tr(s * m^{-1}).
  double trace_solve(const SpdMatrix& s) const;
  /// Returns L * z.
  Vector multiply(std::span<const double> z) const;

  friend CholeskyFactor cholesky(const SpdMatrix& m);

 private:
  std::size_t dim_ = 0;
  std::vector<double> packed_;
  double log_det_ = 0.0;
};

/// Throws NotPositiveDefinite when a pivot is <= 0 or not finite.
CholeskyFactor cholesky(const SpdMatrix& m);

double log_det(const SpdMatrix& m);

double mahalanobis_sq(std::span<const double> x, std::span<const double> mu, const SpdMatrix& sigma);

/// Standard normalization: -(d/2) log 2pi - (1/2) log|sigma| - (1/2) maha.
double mvn_logpdf(std::span<const double> x, std::span<const double> mu, const SpdMatrix& sigma);

/// Log normalizing constant of N(., ., sigma) given its factor.
double mvn_log_normalizer(const CholeskyFactor& factor);

/// Eigenvalues in ascending order (cyclic Jacobi).
std::vector<double> symmetric_eigenvalues(const SpdMatrix& m);

double min_eigenvalue(const SpdMatrix& m);

/// log(sum exp(values)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values) noexcept;

}  // namespace pmle
