#include "pmle/em.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "pmle/errors.hpp"

namespace pmle {

namespace {

constexpr double kEmptyComponentMass = 1e-10;

// Writes responsibilities for g into resp and returns l_n(g).
double expectation(const Dataset& data, const MixtureKernels& kernels, Responsibilities& resp) {
  const std::size_t p = kernels.order();
  std::array<double, 64> stack{};
  std::vector<double> heap;
  std::span<double> joints(stack.data(), p);
  if (p > stack.size()) {
    heap.resize(p);
    joints = heap;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double lf = kernels.log_joints(data.row(i), joints);
    if (!std::isfinite(lf)) {
      throw AllZeroRow("observation " + std::to_string(i) + " has log-density " + std::to_string(lf) +
                       " under every component");
    }
    for (std::size_t j = 0; j < p; ++j) resp(i, j) = std::exp(joints[j] - lf);
    total += lf;
  }
  return total;
}

double penalty_from_kernels(const MixtureKernels& kernels, const PenaltySpec& spec) {
  if (spec.strength == 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < kernels.order(); ++j) {
    const CholeskyFactor& f = kernels.factor(j);
    total += f.trace_solve(spec.anchor) + f.log_det();
  }
  return -spec.strength * total;
}

bool has_collapsed_component(const MixingDistribution& g, double threshold) {
  for (const Component& c : g.components()) {
    const double lo = min_eigenvalue(c.cov);
    if (!(lo >= threshold)) return true;
    try {
      (void)cholesky(c.cov);
    } catch (const NotPositiveDefinite&) {
      return true;
    }
  }
  return false;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iterations < 1) throw PreconditionViolated("max_iterations must be >= 1");
  if (!(rel_tolerance > 0.0)) throw PreconditionViolated("rel_tolerance must be > 0");
  if (!(degeneracy_eigen_ratio > 0.0)) throw PreconditionViolated("degeneracy_eigen_ratio must be > 0");
}

Responsibilities e_step(const Dataset& data, const MixingDistribution& g) {
  if (data.dim() != g.dim()) throw DimensionMismatch("e_step: data and mixture dimension differ");
  const MixtureKernels kernels(g);
  Responsibilities resp(data.size(), g.order());
  (void)expectation(data, kernels, resp);
  return resp;
}

MixingDistribution m_step(const Dataset& data, const Responsibilities& resp, const PenaltySpec& spec,
                          const MixingDistribution* previous) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const std::size_t p = resp.cols();
  if (resp.rows() != n) throw DimensionMismatch("m_step: responsibilities have wrong row count");
  if (spec.anchor.dim() != d) throw DimensionMismatch("m_step: anchor dimension mismatch");
  if (previous != nullptr && (previous->order() != p || previous->dim() != d)) {
    throw DimensionMismatch("m_step: previous mixture shape mismatch");
  }

  const double two_a = 2.0 * spec.strength;
  std::vector<double> mass(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) mass[j] += resp(i, j);
  }
  double mass_total = 0.0;
  for (double m : mass) mass_total += m;

  std::vector<Component> out;
  out.reserve(p);
  std::array<double, kMaxDim> dx{};
  for (std::size_t j = 0; j < p; ++j) {
    Component c;
    c.weight = mass[j] / mass_total;

    c.mean.assign(d, 0.0);
    if (mass[j] >= kEmptyComponentMass) {
      for (std::size_t i = 0; i < n; ++i) {
        const double r = resp(i, j);
        const auto x = data.row(i);
        for (std::size_t k = 0; k < d; ++k) c.mean[k] += r * x[k];
      }
      for (double& v : c.mean) v /= mass[j];
    } else if (previous != nullptr) {
      c.mean = (*previous)[j].mean;
    } else {
      c.mean = sample_mean(data);
    }

    SpdMatrix scatter(d);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = resp(i, j);
      if (r == 0.0) continue;
      const auto x = data.row(i);
      for (std::size_t k = 0; k < d; ++k) dx[k] = x[k] - c.mean[k];
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b <= a; ++b) scatter.set(a, b, scatter(a, b) + r * dx[a] * dx[b]);
      }
    }

    const double denom = two_a + mass[j];
    c.cov = SpdMatrix(d);
    if (denom > 0.0) {
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
          c.cov.set(a, b, (two_a * spec.anchor(a, b) + scatter(a, b)) / denom);
        }
      }
    }
    if (spec.strength == 0.0) {
      if (mass[j] < kEmptyComponentMass) {
        throw NotPositiveDefinite("m_step: component " + std::to_string(j) + " is empty");
      }
      (void)cholesky(c.cov);
    }
    out.push_back(std::move(c));
  }
  return MixingDistribution(std::move(out));
}

bool detect_degeneracy(const MixingDistribution& g, const SpdMatrix& anchor, double ratio) {
  return has_collapsed_component(g, ratio * min_eigenvalue(anchor));
}

FitResult em_fit(const Dataset& data, const MixingDistribution& init, const PenaltySpec& spec, const EmConfig& cfg) {
  cfg.validate();
  if (init.dim() != data.dim()) {
    throw InvalidInit("em_fit: initial mixture has dimension " + std::to_string(init.dim()) + ", data has " +
                      std::to_string(data.dim()));
  }
  if (spec.anchor.dim() != data.dim()) throw InvalidInit("em_fit: anchor dimension differs from data");
  for (std::size_t j = 0; j < init.order(); ++j) {
    try {
      (void)cholesky(init[j].cov);
    } catch (const NotPositiveDefinite&) {
      throw InvalidInit("em_fit: initial covariance of component " + std::to_string(j) +
                        " is not positive definite");
    }
  }

  const double threshold = cfg.degeneracy_eigen_ratio * min_eigenvalue(spec.anchor);
  const bool unpenalized = spec.strength == 0.0;

  FitResult result{init, {}, 0.0, 0.0, 0, false, false};
  Responsibilities resp(data.size(), init.order());
  MixingDistribution g = init;
  double previous = 0.0;
  for (int m = 0;; ++m) {
    std::optional<MixtureKernels> kernels;
    try {
      kernels.emplace(g);
    } catch (const NotPositiveDefinite&) {
      result.degenerate = true;
      break;
    }
    const double ll = expectation(data, *kernels, resp);
    const double pll = ll + penalty_from_kernels(*kernels, spec);
    result.estimate = g;
    result.log_likelihood = ll;
    result.penalized_log_likelihood = pll;
    result.pll_trace.push_back(pll);

    if (has_collapsed_component(g, threshold)) {
      result.degenerate = true;
      if (unpenalized) break;
    }
    if (m > 0 && std::abs(pll - previous) < cfg.rel_tolerance * std::abs(previous)) {
      result.converged = true;
      break;
    }
    if (m >= cfg.max_iterations) break;
    previous = pll;

    try {
      g = m_step(data, resp, spec, &g);
    } catch (const NotPositiveDefinite&) {
      result.degenerate = true;
      break;
    }
    ++result.iterations;
  }
  return result;
}

MultiStartResult multi_start_fit(const Dataset& data, const std::vector<MixingDistribution>& starts,
                                 const PenaltySpec& spec, const EmConfig& cfg) {
  if (starts.empty()) throw PreconditionViolated("multi_start_fit needs at least one start");
  const std::size_t p = starts.front().order();
  const std::size_t d = starts.front().dim();
  for (const auto& s : starts) {
    if (s.order() != p || s.dim() != d) throw InvalidInit("multi_start_fit: starts differ in shape");
  }

  MultiStartResult out{em_fit(data, starts.front(), spec, cfg), 0, {}, 0};
  out.all.reserve(starts.size());
  out.all.push_back(out.best);
  for (std::size_t s = 1; s < starts.size(); ++s) out.all.push_back(em_fit(data, starts[s], spec, cfg));

  const bool unpenalized = spec.strength == 0.0;
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < out.all.size(); ++s) {
    const FitResult& r = out.all[s];
    if (r.degenerate) ++out.degeneracy_count;
    if (unpenalized && r.degenerate) continue;
    const double score = unpenalized ? r.log_likelihood : r.penalized_log_likelihood;
    if (std::isnan(score)) continue;
    if (!best) {
      best = s;
      continue;
    }
    const FitResult& b = out.all[*best];
    const double best_score = unpenalized ? b.log_likelihood : b.penalized_log_likelihood;
    if (score > best_score) best = s;
  }
  if (!best) {
    throw AllDegenerate("all " + std::to_string(starts.size()) + " EM runs degenerated");
  }
  out.best_index = *best;
  out.best = out.all[*best];
  return out;
}

std::size_t lemma2_count(const Dataset& data, const Vector& mu, const SpdMatrix& sigma) {
  if (mu.size() != data.dim() || sigma.dim() != data.dim()) {
    throw DimensionMismatch("lemma2_count: dimension mismatch");
  }
  const CholeskyFactor f = cholesky(sigma);
  const double ld = f.log_det();
  if (!(ld < -4.0 * static_cast<double>(data.dim()))) {
    throw PreconditionViolated("lemma2_count requires |Sigma| < exp(-4d)");
  }
  const double radius_sq = ld * ld;
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (f.mahalanobis_sq(data.row(i), mu) <= radius_sq) ++count;
  }
  return count;
}

}  // namespace pmle
