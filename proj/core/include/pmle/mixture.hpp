#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pmle/linalg.hpp"

namespace pmle {

struct Component {
  double weight = 0.0;
  Vector mean;
  SpdMatrix cov;

  friend bool operator==(const Component&, const Component&) = default;
};

/// Finite normal mixture G = {(pi_j, mu_j, Sigma_j)}. Weights are
/// non-negative and sum to one within 1e-10; all components share one
/// dimension. Covariances are not required to be positive definite here so
/// that degenerate EM iterates remain representable.
class MixingDistribution {
 public:
  explicit MixingDistribution(std::vector<Component> components);

  std::size_t order() const noexcept { return components_.size(); }
  std::size_t dim() const noexcept { return components_.front().mean.size(); }

  const std::vector<Component>& components() const noexcept { return components_; }
  const Component& operator[](std::size_t j) const noexcept { return components_[j]; }

  /// Same mixture with components reordered so that result[j] = (*this)[order[j]].
  MixingDistribution permuted(std::span<const std::size_t> order) const;

  friend bool operator==(const MixingDistribution&, const MixingDistribution&) = default;

 private:
  std::vector<Component> components_;
};

/// n observations of dimension d, stored row-major.
class Dataset {
 public:
  Dataset(std::size_t dim, std::vector<double> values);
  explicit Dataset(const std::vector<Vector>& rows);

  std::size_t size() const noexcept { return values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_;
  std::vector<double> values_;
};

/// Penalty -a_n * sum_j { tr(S_x Sigma_j^{-1}) + log|Sigma_j| }. strength = 0
/// gives the ordinary likelihood.
struct PenaltySpec {
  double strength = 0.0;
  SpdMatrix anchor;

  PenaltySpec(double strength, SpdMatrix anchor);
};

Vector sample_mean(const Dataset& data);
/// Sample covariance with divisor n.
SpdMatrix sample_covariance(const Dataset& data);

/// Per-component cache of log pi_j + log normalizer and the Cholesky factor.
class MixtureKernels {
 public:
  /// Throws NotPositiveDefinite if any component covariance fails to factor.
  explicit MixtureKernels(const MixingDistribution& g);

  std::size_t order() const noexcept { return log_weights_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  /// log(pi_j phi(x; mu_j, Sigma_j)); -inf when pi_j = 0.
  double log_joint(std::size_t j, std::span<const double> x) const;
  /// Fills out[j] = log_joint(j, x) and returns log f(x; G).
  double log_joints(std::span<const double> x, std::span<double> out) const;

  const CholeskyFactor& factor(std::size_t j) const noexcept { return factors_[j]; }

 private:
  std::size_t dim_;
  std::vector<double> log_weights_;
  std::vector<Vector> means_;
  std::vector<CholeskyFactor> factors_;
};

double mixture_logpdf(std::span<const double> x, const MixingDistribution& g);

double log_likelihood(const Dataset& data, const MixingDistribution& g);

/// -a_n (tr(S_x Sigma^{-1}) + log|Sigma|) for one covariance.
double component_penalty(const SpdMatrix& sigma, const PenaltySpec& spec);

double penalty(const MixingDistribution& g, const PenaltySpec& spec);

double penalized_log_likelihood(const Dataset& data, const MixingDistribution& g, const PenaltySpec& spec);

/// Checks the small-determinant condition on one component penalty:
/// p(Sigma) <= 4 (log n)^2 log|Sigma|, valid only when |Sigma| < n^{-2d}.
/// Throws PreconditionViolated when |Sigma| is not below that threshold.
bool check_penalty_c3(const PenaltySpec& spec, const SpdMatrix& sigma, std::size_t n);

}  // namespace pmle
