#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pmle/catalog.hpp"
#include "pmle/harness.hpp"

namespace pmle::oracle {

SpdMatrix random_spd(std::mt19937_64& rng, std::size_t d, double jitter = 0.1);

struct MstepOptimality {
  int instances = 0;
  int perturbations = 0;
  /// Perturbations whose Q exceeded the closed-form Q.
  int violations = 0;
  /// Smallest Q(closed form) - Q(perturbed) seen.
  double min_gap = 0.0;
  int numeric_instances = 0;
  /// Largest |closed form - numeric maximizer| over all parameters.
  double max_numeric_diff = 0.0;
};

/// Random instances with n=20, d=2, p=2 and a_n = 0.1.
MstepOptimality check_mstep_optimality(std::uint64_t seed, int instances, int perturbations, int numeric_instances);

struct SmallDetCheck {
  int pairs = 0;
  int violations = 0;
  std::size_t max_count = 0;
  /// Pairs where the ellipsoid contains at least one point.
  int nonempty = 0;
};

/// 4 (log n)^2 I(|S| <= alpha_n) + 8 n delta_n(|S|) I(|S| >= alpha_n).
double small_det_bound(double det, std::size_t n, std::size_t d, double lambda0);

/// `datasets` samples of size n from model I.2.1, `pairs` random (mu, Sigma)
/// each with |Sigma| log-uniform on [1e-20, exp(-4d)).
SmallDetCheck check_small_det_bound(std::uint64_t seed, int datasets, int pairs, std::size_t n);

struct AscentCheck {
  int fits = 0;
  int violations = 0;
  /// Largest pll(m) - pll(m+1) observed.
  double worst_drop = 0.0;
  int pmle_runs = 0;
  int pmle_degenerate = 0;
};

/// Runs em_fit for every (model, method, rep) with one start of the ten-start
/// scheme chosen by rep, until `fits` fits have been made.
AscentCheck check_ascent(const std::vector<ModelSpec>& models, const std::vector<MethodSpec>& methods, int fits,
                         std::uint64_t seed, double slack);

}  // namespace pmle::oracle
