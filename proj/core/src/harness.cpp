#include "pmle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "pmle/errors.hpp"

namespace pmle {

MethodSpec MethodSpec::parse(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mle") return {Method::MLE};
  if (lower == "pmle1") return {Method::PMLE1};
  if (lower == "pmle2") return {Method::PMLE2};
  throw ParseError("unknown method '" + std::string(name) + "' (expected mle, pmle1 or pmle2)");
}

std::string_view MethodSpec::name() const noexcept {
  switch (method) {
    case Method::MLE:
      return "MLE";
    case Method::PMLE1:
      return "PMLE1";
    case Method::PMLE2:
      return "PMLE2";
  }
  return "?";
}

double MethodSpec::strength(std::size_t n) const noexcept {
  const double nn = static_cast<double>(n);
  switch (method) {
    case Method::MLE:
      return 0.0;
    case Method::PMLE1:
      return 1.0 / nn;
    case Method::PMLE2:
      return 1.0 / std::sqrt(nn);
  }
  return 0.0;
}

Permutation match_components(const MixingDistribution& est, const MixingDistribution& truth) {
  if (est.order() != truth.order() || est.dim() != truth.dim()) {
    throw DimensionMismatch("match_components: mixtures differ in order or dimension");
  }
  const std::size_t p = truth.order();
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  // next_permutation enumerates in lexicographic order; strict < keeps the first minimum.
  do {
    double cost = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const Vector& a = est[perm[j]].mean;
      const Vector& b = truth[j].mean;
      for (std::size_t k = 0; k < a.size(); ++k) cost += (a[k] - b[k]) * (a[k] - b[k]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best};
}

std::vector<std::string> parameter_names(std::size_t order, std::size_t dim) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= order; ++j) {
    const std::string c = "c" + std::to_string(j) + ".";
    names.push_back(c + "pi");
    for (std::size_t k = 1; k <= dim; ++k) names.push_back(c + "mu" + std::to_string(k));
    for (std::size_t r = 1; r <= dim; ++r) {
      for (std::size_t s = r; s <= dim; ++s) names.push_back(c + "sigma" + std::to_string(r) + std::to_string(s));
    }
  }
  return names;
}

std::vector<double> flatten_parameters(const MixingDistribution& g) {
  std::vector<double> out;
  const std::size_t d = g.dim();
  for (const Component& c : g.components()) {
    out.push_back(c.weight);
    out.insert(out.end(), c.mean.begin(), c.mean.end());
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t s = r; s < d; ++s) out.push_back(c.cov(r, s));
    }
  }
  return out;
}

std::vector<ReplicationOutcome> run_replication_methods(const ModelSpec& model, const std::vector<MethodSpec>& methods,
                                                        std::size_t rep_index, std::uint64_t base_seed,
                                                        const EmConfig& cfg, std::optional<std::size_t> sample_size) {
  const MixingDistribution truth = resolve_model(model);
  const std::size_t n = sample_size.value_or(model.sample_size());
  const std::uint64_t seed = replication_seed(base_seed, model.index(), rep_index);
  const Dataset data = sample(truth, n, seed);
  const std::vector<MixingDistribution> starts = make_starts(data, truth, seed);
  const SpdMatrix anchor = sample_covariance(data);
  const std::vector<double> truth_params = flatten_parameters(truth);

  std::vector<ReplicationOutcome> out;
  out.reserve(methods.size());
  for (const MethodSpec& method : methods) {
    ReplicationOutcome o;
    o.runs = static_cast<int>(starts.size());
    const PenaltySpec spec(method.strength(n), anchor);
    try {
      const MultiStartResult fit = multi_start_fit(data, starts, spec, cfg);
      o.degeneracy_count = fit.degeneracy_count;
      const Permutation perm = match_components(fit.best.estimate, truth);
      const std::vector<double> est = flatten_parameters(fit.best.estimate.permuted(perm.est_index));
      o.errors.resize(est.size());
      for (std::size_t k = 0; k < est.size(); ++k) o.errors[k] = est[k] - truth_params[k];
    } catch (const AllDegenerate&) {
      o.failed = true;
      o.degeneracy_count = o.runs;
    }
    out.push_back(std::move(o));
  }
  return out;
}

ReplicationOutcome run_replication(const ModelSpec& model, const MethodSpec& method, std::size_t rep_index,
                                   std::uint64_t base_seed, const EmConfig& cfg,
                                   std::optional<std::size_t> sample_size) {
  return std::move(run_replication_methods(model, {method}, rep_index, base_seed, cfg, sample_size).front());
}

ErrorSummary aggregate(const std::vector<std::vector<double>>& errors) {
  if (errors.size() < 2) {
    throw InsufficientReplications("aggregate needs >= 2 replications, got " + std::to_string(errors.size()));
  }
  const std::size_t k = errors.front().size();
  ErrorSummary s{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  for (const auto& e : errors) {
    if (e.size() != k) throw DimensionMismatch("aggregate: error vectors differ in length");
  }
  const double r = static_cast<double>(errors.size());
  for (std::size_t p = 0; p < k; ++p) {
    // Sum in sorted order so the result does not depend on replication order.
    std::vector<double> col;
    col.reserve(errors.size());
    for (const auto& e : errors) col.push_back(e[p]);
    std::sort(col.begin(), col.end());
    double sum = 0.0;
    for (double v : col) sum += v;
    const double mean = sum / r;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    s.bias[p] = mean;
    s.std[p] = std::sqrt(ss / (r - 1.0));
  }
  return s;
}

std::vector<SimulationReport> run_study(const std::vector<ModelSpec>& models, const std::vector<MethodSpec>& methods,
                                        const StudyOptions& options) {
  if (options.replications < 2) throw InsufficientReplications("run_study needs >= 2 replications");
  if (methods.empty()) throw PreconditionViolated("run_study needs at least one method");
  options.em.validate();

  const std::size_t reps = options.replications;
  const std::size_t tasks = models.size() * reps;
  std::vector<std::vector<ReplicationOutcome>> results(tasks);
  std::vector<std::exception_ptr> failures(tasks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
      try {
        results[t] = run_replication_methods(models[t / reps], methods, t % reps, options.base_seed, options.em,
                                             options.sample_size);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  std::size_t width = options.parallelism == 0 ? std::thread::hardware_concurrency() : options.parallelism;
  width = std::clamp<std::size_t>(width, 1, std::max<std::size_t>(tasks, 1));
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(width);
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<SimulationReport> reports;
  reports.reserve(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    const ModelSpec& model = models[m];
    const MixingDistribution truth = resolve_model(model);
    const std::vector<double> truth_params = flatten_parameters(truth);
    const std::vector<std::string> names = parameter_names(truth.order(), truth.dim());

    SimulationReport report;
    report.model = model;
    report.n = options.sample_size.value_or(model.sample_size());
    report.replications = reps;
    report.seed = options.base_seed;
    for (std::size_t k = 0; k < methods.size(); ++k) {
      MethodReport mr;
      mr.method = methods[k];
      mr.strength = methods[k].strength(report.n);
      std::vector<std::vector<double>> errors;
      for (std::size_t r = 0; r < reps; ++r) {
        const ReplicationOutcome& o = results[m * reps + r][k];
        mr.degeneracy_count += o.degeneracy_count;
        mr.runs += o.runs;
        if (o.failed) {
          ++mr.failures;
        } else {
          errors.push_back(o.errors);
        }
      }
      mr.successes = static_cast<int>(errors.size());
      const ErrorSummary summary = aggregate(errors);
      for (std::size_t p = 0; p < names.size(); ++p) {
        mr.parameters.push_back({names[p], truth_params[p], summary.bias[p], summary.std[p]});
      }
      if (options.keep_raw_errors) mr.raw_errors = std::move(errors);
      report.methods.push_back(std::move(mr));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace pmle
