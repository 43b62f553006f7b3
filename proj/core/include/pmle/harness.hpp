#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmle/catalog.hpp"
#include "pmle/em.hpp"

namespace pmle {

enum class Method { MLE, PMLE1, PMLE2 };

/// MLE: a_n = 0; PMLE1: a_n = 1/n; PMLE2: a_n = n^{-1/2}.
struct MethodSpec {
  Method method = Method::PMLE2;

  /// Accepts "mle", "pmle1", "pmle2" in any case.
  static MethodSpec parse(std::string_view name);
  std::string_view name() const noexcept;
  double strength(std::size_t n) const noexcept;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// est_index[j] is the estimated component matched to true component j.
struct Permutation {
  std::vector<std::size_t> est_index;

  friend bool operator==(const Permutation&, const Permutation&) = default;
};

/// Bijection minimizing sum_j |mu_hat(sigma(j)) - mu_0j|^2 by exhaustive
/// search; ties go to the lexicographically smallest permutation.
Permutation match_components(const MixingDistribution& est, const MixingDistribution& truth);

/// "c<j>.pi", "c<j>.mu<k>", "c<j>.sigma<r><s>" (r <= s), 1-based, per component.
std::vector<std::string> parameter_names(std::size_t order, std::size_t dim);

/// Parameter vector in parameter_names order.
std::vector<double> flatten_parameters(const MixingDistribution& g);

struct ReplicationOutcome {
  bool failed = false;
  /// estimate - truth per parameter under the matched labeling; empty if failed.
  std::vector<double> errors;
  int degeneracy_count = 0;
  int runs = 0;
};

/// One Monte-Carlo replication: sample, ten starts, multi-start EM with the
/// method's a_n anchored at this sample's covariance, label matching.
ReplicationOutcome run_replication(const ModelSpec& model, const MethodSpec& method, std::size_t rep_index,
                                   std::uint64_t base_seed, const EmConfig& cfg,
                                   std::optional<std::size_t> sample_size = std::nullopt);

/// Same sample and starts shared by several methods.
std::vector<ReplicationOutcome> run_replication_methods(const ModelSpec& model, const std::vector<MethodSpec>& methods,
                                                        std::size_t rep_index, std::uint64_t base_seed,
                                                        const EmConfig& cfg,
                                                        std::optional<std::size_t> sample_size = std::nullopt);

struct ErrorSummary {
  std::vector<double> bias;
  std::vector<double> std;
};

/// Mean and sample standard deviation (divisor R-1) per parameter.
ErrorSummary aggregate(const std::vector<std::vector<double>>& errors);

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  double bias = 0.0;
  double std = 0.0;
};

struct MethodReport {
  MethodSpec method;
  double strength = 0.0;
  std::vector<ParameterSummary> parameters;
  int degeneracy_count = 0;
  int runs = 0;
  int failures = 0;
  int successes = 0;
  std::vector<std::vector<double>> raw_errors;
};

struct SimulationReport {
  ModelSpec model;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<MethodReport> methods;
};

struct StudyOptions {
  std::size_t replications = 1000;
  std::uint64_t base_seed = 1;
  EmConfig em;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  std::size_t parallelism = 0;
  bool keep_raw_errors = false;
  std::optional<std::size_t> sample_size;
};

/// One report per model. Replications are independent tasks; results are
/// folded in replication order, so output does not depend on parallelism.
std::vector<SimulationReport> run_study(const std::vector<ModelSpec>& models, const std::vector<MethodSpec>& methods,
                                        const StudyOptions& options);

}  // namespace pmle
