#pragma once

#include <cstddef>
#include <vector>

#include "pmle/mixture.hpp"

namespace pmle {

/// n x p posterior membership probabilities, row-major.
class Responsibilities {
 public:
  Responsibilities(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

struct EmConfig {
  int max_iterations = 2000;
  /// Stop when |pll(m+1) - pll(m)| / |pll(m)| falls below this.
  double rel_tolerance = 1e-8;
  /// A component is degenerate when its smallest eigenvalue drops below this
  /// multiple of the anchor's smallest eigenvalue.
  double degeneracy_eigen_ratio = 1e-8;

  void validate() const;
};

struct FitResult {
  MixingDistribution estimate;
  /// Penalized log-likelihood of every evaluated iterate, starting with init.
  std::vector<double> pll_trace;
  double log_likelihood = 0.0;
  double penalized_log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

/// Posterior memberships under g via per-row log-sum-exp.
Responsibilities e_step(const Dataset& data, const MixingDistribution& g);

/// Closed-form maximizer of the expected complete penalized log-likelihood:
/// pi_j = sum_i r_ij / n, mu_j = sum_i r_ij x_i / (n pi_j),
/// Sigma_j = (2 a_n S_x + S_j) / (2 a_n + n pi_j), with S_j the r-weighted
/// scatter about the new mean. Components with n pi_j < 1e-10 keep their
/// mean. Throws NotPositiveDefinite when a_n = 0 and a covariance comes out
/// singular.
MixingDistribution m_step(const Dataset& data, const Responsibilities& resp, const PenaltySpec& spec,
                          const MixingDistribution* previous = nullptr);

bool detect_degeneracy(const MixingDistribution& g, const SpdMatrix& anchor, double ratio);

FitResult em_fit(const Dataset& data, const MixingDistribution& init, const PenaltySpec& spec, const EmConfig& cfg);

struct MultiStartResult {
  FitResult best;
  std::size_t best_index = 0;
  std::vector<FitResult> all;
  int degeneracy_count = 0;
};

/// Runs em_fit from every start. With a_n = 0, degenerate runs are dropped
/// before picking the highest log-likelihood (the ratified MLE); otherwise the
/// highest penalized log-likelihood wins. Throws AllDegenerate when every
/// unpenalized run degenerated.
MultiStartResult multi_start_fit(const Dataset& data, const std::vector<MixingDistribution>& starts,
                                 const PenaltySpec& spec, const EmConfig& cfg);

/// Number of observations with (x_i - mu)^T Sigma^{-1} (x_i - mu) <= (log|Sigma|)^2.
/// Requires |Sigma| < exp(-4d).
std::size_t lemma2_count(const Dataset& data, const Vector& mu, const SpdMatrix& sigma);

}  // namespace pmle
