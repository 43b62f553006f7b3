#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pmle/mixture.hpp"

namespace pmle {

/// I: p=2,d=2  II: p=3,d=2  III: p=2,d=3  IV: p=3,d=3.
enum class Category { I = 1, II = 2, III = 3, IV = 4 };

/// Catalog entry "<category>.<mean config>.<cov config>", e.g. "I.2.4".
struct ModelSpec {
  Category category = Category::I;
  int mean_config = 1;  // 1..3
  int cov_config = 1;   // 1..6

  /// Throws UnknownModel for malformed or out-of-range identifiers.
  static ModelSpec parse(std::string_view id);

  std::string id() const;
  std::size_t order() const noexcept;
  std::size_t dim() const noexcept;
  /// 200 for category I, 300 otherwise.
  std::size_t sample_size() const noexcept;
  /// Position in the 72-model catalog, 0-based, in I.1.1, I.1.2, ... order.
  std::size_t index() const noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct CovParams2D {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double theta = 0.0;
};

struct CovParams3D {
  std::array<double, 3> lambdas{1.0, 1.0, 1.0};
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

using Rotation3 = std::array<std::array<double, 3>, 3>;

/// Rz(gamma) * Ry(beta) * Rx(alpha).
Rotation3 rotation_3d(double alpha, double beta, double gamma);

/// R(theta) diag(lambda1, lambda2) R(theta)^T, R the counter-clockwise rotation.
SpdMatrix build_cov_2d(const CovParams2D& params);
/// P diag(lambdas) P^T with P = rotation_3d(alpha, beta, gamma).
SpdMatrix build_cov_3d(const CovParams3D& params);

/// Ground-truth mixture of a catalog model.
MixingDistribution resolve_model(const ModelSpec& spec);

/// All 72 models in catalog order.
std::vector<ModelSpec> all_models();

/// n i.i.d. draws: categorical component label, then mu_j + L_j z.
Dataset sample(const MixingDistribution& g, std::size_t n, std::uint64_t seed);

/// base_seed * 1e6 + model_index * 1e3 + replication.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t model_index, std::size_t replication);

/// Ten starts: truth, truth with four mean perturbations, then five
/// data-based starts (equal weights, sample covariance, perturbed sample
/// mean). Perturbations are uniform on [-s_k, s_k], s_k the sample standard
/// deviation of coordinate k.
std::vector<MixingDistribution> make_starts(const Dataset& data, const MixingDistribution& truth,
                                            std::uint64_t seed);

/// Data-based starts only: the first uses the sample mean unperturbed, the
/// remaining count-1 perturb it.
std::vector<MixingDistribution> make_data_starts(const Dataset& data, std::size_t order, std::uint64_t seed,
                                                 std::size_t count = 10);

}  // namespace pmle
