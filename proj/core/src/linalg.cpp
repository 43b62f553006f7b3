#include "pmle/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pmle/errors.hpp"

namespace pmle {

namespace {

void require_dim(std::size_t dim) {
  if (dim == 0 || dim > kMaxDim) {
    throw PreconditionViolated("matrix dimension must be in [1, " + std::to_string(kMaxDim) +
                               "], got " + std::to_string(dim));
  }
}

}  // namespace

SpdMatrix::SpdMatrix(std::size_t dim) : dim_(dim), packed_(dim * (dim + 1) / 2, 0.0) {
  require_dim(dim);
}

SpdMatrix SpdMatrix::identity(std::size_t dim) {
  SpdMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SpdMatrix SpdMatrix::diagonal(std::span<const double> diag) {
  SpdMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.set(i, i, diag[i]);
  return m;
}

SpdMatrix SpdMatrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

SpdMatrix SpdMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.size();
  SpdMatrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) {
      throw DimensionMismatch("matrix row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(d));
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double a = rows[i][j];
      const double b = rows[j][i];
      const double scale = std::max({std::abs(a), std::abs(b), 1.0});
      if (!(std::abs(a - b) <= 1e-12 * scale)) {
        throw PreconditionViolated("matrix is not symmetric at (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
      }
      m.set(i, j, a);
    }
  }
  return m;
}

SpdMatrix SpdMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> full;
  full.reserve(rows.size());
  for (const auto& r : rows) full.emplace_back(r);
  return from_rows(full);
}

std::vector<std::vector<double>> SpdMatrix::to_rows() const {
  std::vector<std::vector<double>> rows(dim_, std::vector<double>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) rows[i][j] = (*this)(i, j);
  }
  return rows;
}

SpdMatrix SpdMatrix::scaled(double factor) const {
  SpdMatrix out = *this;
  for (double& v : out.packed_) v *= factor;
  return out;
}

double SpdMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double SpdMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : packed_) m = std::max(m, std::abs(v));
  return m;
}

CholeskyFactor cholesky(const SpdMatrix& m) {
  const std::size_t d = m.dim();
  require_dim(d);
  CholeskyFactor f;
  f.dim_ = d;
  f.packed_.assign(d * (d + 1) / 2, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return f.packed_[i * (i + 1) / 2 + j]; };
  double log_det = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= at(j, k) * at(j, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw NotPositiveDefinite("non-positive Cholesky pivot " + std::to_string(pivot) +
                                " at column " + std::to_string(j));
    }
    const double ljj = std::sqrt(pivot);
    at(j, j) = ljj;
    log_det += 2.0 * std::log(ljj);
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      at(i, j) = s / ljj;
    }
  }
  f.log_det_ = log_det;
  return f;
}

void CholeskyFactor::solve_lower(std::span<double> b) const noexcept {
  for (std::size_t i = 0; i < dim_; ++i) {
    const double* row = packed_.data() + i * (i + 1) / 2;
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= row[k] * b[k];
    b[i] = s / row[i];
  }
}

double CholeskyFactor::mahalanobis_sq(std::span<const double> x, std::span<const double> mu) const {
  if (x.size() != dim_ || mu.size() != dim_) {
    throw DimensionMismatch("mahalanobis_sq: dimension " + std::to_string(x.size()) + "/" +
                            std::to_string(mu.size()) + " vs matrix " + std::to_string(dim_));
  }
  std::array<double, kMaxDim> y{};
  for (std::size_t i = 0; i < dim_; ++i) y[i] = x[i] - mu[i];
  solve_lower(std::span<double>(y.data(), dim_));
  double q = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) q += y[i] * y[i];
  return q;
}

double CholeskyFactor::trace_solve(const SpdMatrix& s) const {
  if (s.dim() != dim_) throw DimensionMismatch("trace_solve: dimension mismatch");
  // tr(S M^{-1}) = sum_k e_k^T M^{-1} S e_k; solve L L^T x = s_k per column.
  double t = 0.0;
  std::array<double, kMaxDim> col{};
  for (std::size_t k = 0; k < dim_; ++k) {
    for (std::size_t i = 0; i < dim_; ++i) col[i] = s(i, k);
    solve_lower(std::span<double>(col.data(), dim_));
    for (std::size_t ii = dim_; ii-- > 0;) {
      double v = col[ii];
      for (std::size_t r = ii + 1; r < dim_; ++r) v -= (*this)(r, ii) * col[r];
      col[ii] = v / (*this)(ii, ii);
    }
    t += col[k];
  }
  return t;
}

Vector CholeskyFactor::multiply(std::span<const double> z) const {
  if (z.size() != dim_) throw DimensionMismatch("multiply: dimension mismatch");
  Vector out(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += (*this)(i, k) * z[k];
    out[i] = s;
  }
  return out;
}

double log_det(const SpdMatrix& m) { return cholesky(m).log_det(); }

double mahalanobis_sq(std::span<const double> x, std::span<const double> mu, const SpdMatrix& sigma) {
  if (x.size() != sigma.dim() || mu.size() != sigma.dim()) {
    throw DimensionMismatch("mahalanobis_sq: vector and matrix dimensions disagree");
  }
  return cholesky(sigma).mahalanobis_sq(x, mu);
}

double mvn_log_normalizer(const CholeskyFactor& factor) {
  const double d = static_cast<double>(factor.dim());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * factor.log_det();
}

double mvn_logpdf(std::span<const double> x, std::span<const double> mu, const SpdMatrix& sigma) {
  if (x.size() != sigma.dim() || mu.size() != sigma.dim()) {
    throw DimensionMismatch("mvn_logpdf: vector and matrix dimensions disagree");
  }
  const CholeskyFactor f = cholesky(sigma);
  return mvn_log_normalizer(f) - 0.5 * f.mahalanobis_sq(x, mu);
}

std::vector<double> symmetric_eigenvalues(const SpdMatrix& m) {
  const std::size_t d = m.dim();
  std::vector<double> a(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) a[i * d + j] = m(i, j);
  }
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * d + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      diag += A(i, i) * A(i, i);
      for (std::size_t j = i + 1; j < d; ++j) off += A(i, j) * A(i, j);
    }
    if (off <= 1e-32 * diag || off == 0.0) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(d);
  for (std::size_t i = 0; i < d; ++i) ev[i] = A(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double min_eigenvalue(const SpdMatrix& m) {
  if (m.dim() == 1) return m(0, 0);
  if (m.dim() == 2) {
    const double a = m(0, 0);
    const double b = m(1, 0);
    const double c = m(1, 1);
    const double half_tr = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    const double lo = half_tr - r;
    // Avoid cancellation: lo * hi = det.
    if (half_tr > 0.0 && lo < 1e-3 * half_tr) return (a * c - b * b) / (half_tr + r);
    return lo;
  }
  return symmetric_eigenvalues(m).front();
}

double log_sum_exp(std::span<const double> values) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : values) s += std::exp(v - hi);
  return hi + std::log(s);
}

}  // namespace pmle
