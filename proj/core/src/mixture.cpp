#include "pmle/mixture.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "pmle/errors.hpp"

namespace pmle {

MixingDistribution::MixingDistribution(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw PreconditionViolated("mixing distribution needs at least one component");
  const std::size_t d = components_.front().mean.size();
  double total = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const Component& c = components_[j];
    if (c.mean.size() != d || c.cov.dim() != d) {
      throw DimensionMismatch("component " + std::to_string(j) + " has mean dim " +
                              std::to_string(c.mean.size()) + " and cov dim " +
                              std::to_string(c.cov.dim()) + ", expected " + std::to_string(d));
    }
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      throw PreconditionViolated("component " + std::to_string(j) + " has invalid weight");
    }
    total += c.weight;
  }
  if (d == 0) throw DimensionMismatch("mixing distribution has dimension 0");
  if (std::abs(total - 1.0) > 1e-10) {
    throw PreconditionViolated("mixing weights sum to " + std::to_string(total));
  }
}

MixingDistribution MixingDistribution::permuted(std::span<const std::size_t> order) const {
  if (order.size() != components_.size()) throw DimensionMismatch("permutation size mismatch");
  std::vector<Component> out;
  out.reserve(order.size());
  for (std::size_t j : order) out.push_back(components_.at(j));
  return MixingDistribution(std::move(out));
}

Dataset::Dataset(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw DimensionMismatch("dataset dimension must be >= 1");
  if (values_.empty() || values_.size() % dim_ != 0) {
    throw DimensionMismatch("dataset needs a positive multiple of " + std::to_string(dim_) + " values");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw PreconditionViolated("dataset contains a non-finite value");
  }
}

namespace {

std::vector<double> flatten(const std::vector<Vector>& rows) {
  if (rows.empty()) throw DimensionMismatch("dataset needs at least one row");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw DimensionMismatch("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                              " values, expected " + std::to_string(d));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return flat;
}

}  // namespace

Dataset::Dataset(const std::vector<Vector>& rows)
    : Dataset(rows.empty() ? 0 : rows.front().size(), flatten(rows)) {}

PenaltySpec::PenaltySpec(double strength_, SpdMatrix anchor_) : strength(strength_), anchor(std::move(anchor_)) {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw PreconditionViolated("penalty strength must be finite and >= 0");
  }
  (void)cholesky(anchor);
}

Vector sample_mean(const Dataset& data) {
  const std::size_t d = data.dim();
  Vector mean(d, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    for (std::size_t k = 0; k < d; ++k) mean[k] += x[k];
  }
  for (double& m : mean) m /= static_cast<double>(data.size());
  return mean;
}

SpdMatrix sample_covariance(const Dataset& data) {
  const std::size_t d = data.dim();
  const Vector mean = sample_mean(data);
  SpdMatrix s(d);
  std::array<double, kMaxDim> dx{};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    for (std::size_t k = 0; k < d; ++k) dx[k] = x[k] - mean[k];
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c <= r; ++c) s.set(r, c, s(r, c) + dx[r] * dx[c]);
    }
  }
  return s.scaled(1.0 / static_cast<double>(data.size()));
}

MixtureKernels::MixtureKernels(const MixingDistribution& g) : dim_(g.dim()) {
  const std::size_t p = g.order();
  log_weights_.reserve(p);
  means_.reserve(p);
  factors_.reserve(p);
  for (const Component& c : g.components()) {
    factors_.push_back(cholesky(c.cov));
    means_.push_back(c.mean);
    const double lw = c.weight > 0.0 ? std::log(c.weight) : -std::numeric_limits<double>::infinity();
    log_weights_.push_back(lw + mvn_log_normalizer(factors_.back()));
  }
}

double MixtureKernels::log_joint(std::size_t j, std::span<const double> x) const {
  if (!std::isfinite(log_weights_[j])) return log_weights_[j];
  return log_weights_[j] - 0.5 * factors_[j].mahalanobis_sq(x, means_[j]);
}

double MixtureKernels::log_joints(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < log_weights_.size(); ++j) out[j] = log_joint(j, x);
  return log_sum_exp(out.first(log_weights_.size()));
}

double mixture_logpdf(std::span<const double> x, const MixingDistribution& g) {
  if (x.size() != g.dim()) throw DimensionMismatch("mixture_logpdf: observation dimension mismatch");
  const MixtureKernels k(g);
  std::vector<double> scratch(g.order());
  return k.log_joints(x, scratch);
}

double log_likelihood(const Dataset& data, const MixingDistribution& g) {
  if (data.dim() != g.dim()) throw DimensionMismatch("log_likelihood: data and mixture dimension differ");
  const MixtureKernels k(g);
  std::vector<double> scratch(g.order());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += k.log_joints(data.row(i), scratch);
  return total;
}

double component_penalty(const SpdMatrix& sigma, const PenaltySpec& spec) {
  if (sigma.dim() != spec.anchor.dim()) throw DimensionMismatch("penalty: covariance and anchor dimension differ");
  if (spec.strength == 0.0) return 0.0;
  const CholeskyFactor f = cholesky(sigma);
  return -spec.strength * (f.trace_solve(spec.anchor) + f.log_det());
}

double penalty(const MixingDistribution& g, const PenaltySpec& spec) {
  double total = 0.0;
  for (const Component& c : g.components()) total += component_penalty(c.cov, spec);
  return total;
}

double penalized_log_likelihood(const Dataset& data, const MixingDistribution& g, const PenaltySpec& spec) {
  return log_likelihood(data, g) + penalty(g, spec);
}

bool check_penalty_c3(const PenaltySpec& spec, const SpdMatrix& sigma, std::size_t n) {
  if (n < 2) throw PreconditionViolated("check_penalty_c3 needs n >= 2");
  const double ld = log_det(sigma);
  const double d = static_cast<double>(sigma.dim());
  const double log_n = std::log(static_cast<double>(n));
  // c = 1: |Sigma| < n^{-2d}.
  if (!(ld < -2.0 * d * log_n)) {
    throw PreconditionViolated("check_penalty_c3: |Sigma| is not below n^(-2d)");
  }
  return component_penalty(sigma, spec) <= 4.0 * log_n * log_n * ld;
}

}  // namespace pmle
