#include "pmle/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

#include "pmle/errors.hpp"

namespace pmle {

namespace {

constexpr double kPi = std::numbers::pi;

using Mean2 = std::array<double, 2>;
using Mean3 = std::array<double, 3>;

// Mean tables, indexed [mean_config - 1][component].
constexpr std::array<std::array<Mean2, 2>, 3> kMeansI{{
    {{{0, -1}, {0, 1}}},  // near
    {{{0, -3}, {0, 3}}},  // moderate
    {{{0, -5}, {0, 5}}},  // distant
}};
constexpr std::array<std::array<Mean2, 3>, 3> kMeansII{{
    {{{0, -2}, {0, 0}, {0, 2}}},  // straight
    {{{0, -2}, {3, 0}, {0, 2}}},  // acute
    {{{0, -2}, {1, 0}, {0, 2}}},  // obtuse
}};
constexpr std::array<std::array<Mean3, 2>, 3> kMeansIII{{
    {{{0, 0, -1}, {0, 0, 1}}},
    {{{0, 0, -3}, {0, 0, 3}}},
    {{{0, 0, -5}, {0, 0, 5}}},
}};
constexpr std::array<std::array<Mean3, 3>, 3> kMeansIV{{
    {{{0, 0, -2}, {0, 0, 0}, {0, 0, 2}}},
    {{{0, 0, -2}, {0, 3, 0}, {0, 0, 2}}},
    {{{0, 0, -2}, {0, 1, 0}, {0, 0, 2}}},
}};

constexpr CovParams2D kRound{1, 1, 0};
constexpr CovParams2D kLong0{1, 5, 0};
constexpr CovParams2D kLongQ{1, 5, kPi / 4};
constexpr CovParams2D kLongH{1, 5, kPi / 2};
constexpr CovParams2D kLongNegQ{1, 5, -kPi / 4};
constexpr CovParams2D kLongNegH{1, 5, -kPi / 2};

// Covariance tables, indexed [cov_config - 1][component].
constexpr std::array<std::array<CovParams2D, 2>, 6> kCovI{{
    {{kRound, kRound}},
    {{kLong0, kRound}},
    {{kLongQ, kRound}},
    {{kLongH, kRound}},
    {{kLongQ, kLong0}},
    {{kLongH, kLong0}},
}};
constexpr std::array<std::array<CovParams2D, 3>, 6> kCovII{{
    {{kRound, kRound, kRound}},
    {{kRound, kRound, kLong0}},
    {{kRound, kLong0, kLongQ}},
    {{kRound, kLong0, kLongH}},
    {{kLong0, kLongQ, kLongNegQ}},
    {{kLong0, kLongQ, kLongNegH}},
}};

constexpr CovParams3D kSphere{{1, 1, 1}, 0, 0, 0};
constexpr CovParams3D kAxis{{1, 3, 10}, 0, 0, 0};
constexpr CovParams3D kTiltA{{1, 3, 10}, -kPi / 3, kPi / 3, kPi / 3};
constexpr CovParams3D kTiltB{{1, 3, 10}, kPi / 3, -kPi / 3, kPi / 3};
constexpr CovParams3D kTiltC{{1, 3, 10}, kPi / 3, kPi / 3, -kPi / 3};

constexpr std::array<std::array<CovParams3D, 2>, 6> kCovIII{{
    {{kSphere, kSphere}},
    {{kSphere, kAxis}},
    {{kAxis, kAxis}},
    {{kAxis, kTiltA}},
    {{kAxis, kTiltB}},
    {{kAxis, kTiltC}},
}};
constexpr std::array<std::array<CovParams3D, 3>, 6> kCovIV{{
    {{kSphere, kSphere, kSphere}},
    {{kSphere, kSphere, kAxis}},
    {{kSphere, kAxis, kTiltA}},
    {{kSphere, kAxis, kTiltB}},
    {{kAxis, kTiltA, kTiltB}},
    {{kAxis, kTiltB, kTiltC}},
}};

constexpr std::array<double, 2> kWeights2{0.3, 0.7};
constexpr std::array<double, 3> kWeights3{0.15, 0.35, 0.50};

std::string_view category_name(Category c) {
  switch (c) {
    case Category::I:
      return "I";
    case Category::II:
      return "II";
    case Category::III:
      return "III";
    case Category::IV:
      return "IV";
  }
  return "?";
}

template <std::size_t P, std::size_t D, typename Cov>
MixingDistribution assemble(const std::array<double, P>& weights, const std::array<std::array<double, D>, P>& means,
                            const std::array<Cov, P>& covs) {
  std::vector<Component> comps;
  comps.reserve(P);
  for (std::size_t j = 0; j < P; ++j) {
    Component c;
    c.weight = weights[j];
    c.mean.assign(means[j].begin(), means[j].end());
    if constexpr (D == 2) {
      c.cov = build_cov_2d(covs[j]);
    } else {
      c.cov = build_cov_3d(covs[j]);
    }
    comps.push_back(std::move(c));
  }
  return MixingDistribution(std::move(comps));
}

std::mt19937_64 derived_engine(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

Vector perturbed(const Vector& base, const Vector& scale, std::mt19937_64& rng) {
  Vector out = base;
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uniform_real_distribution<double> u(-scale[k], scale[k]);
    out[k] += u(rng);
  }
  return out;
}

// Entries that vanish in exact arithmetic (e.g. cos(pi/2) terms) are snapped to 0.
void snap_zeros(SpdMatrix& m, double scale) {
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (std::abs(m(i, j)) < 1e-14 * scale) m.set(i, j, 0.0);
    }
  }
}

Vector coordinate_sd(const Dataset& data) {
  const SpdMatrix s = sample_covariance(data);
  Vector sd(data.dim());
  for (std::size_t k = 0; k < sd.size(); ++k) sd[k] = std::sqrt(s(k, k));
  return sd;
}

constexpr std::uint32_t kStartStreamTag = 0x53544152;  // "STAR"

}  // namespace

ModelSpec ModelSpec::parse(std::string_view id) {
  const auto fail = [&] { return UnknownModel("unknown model identifier '" + std::string(id) + "'"); };
  const auto dot1 = id.find('.');
  if (dot1 == std::string_view::npos) throw fail();
  const auto dot2 = id.find('.', dot1 + 1);
  if (dot2 == std::string_view::npos) throw fail();
  const std::string_view cat = id.substr(0, dot1);
  ModelSpec spec;
  if (cat == "I") {
    spec.category = Category::I;
  } else if (cat == "II") {
    spec.category = Category::II;
  } else if (cat == "III") {
    spec.category = Category::III;
  } else if (cat == "IV") {
    spec.category = Category::IV;
  } else {
    throw fail();
  }
  const auto parse_int = [&](std::string_view s, int lo, int hi) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < lo || v > hi) throw fail();
    return v;
  };
  spec.mean_config = parse_int(id.substr(dot1 + 1, dot2 - dot1 - 1), 1, 3);
  spec.cov_config = parse_int(id.substr(dot2 + 1), 1, 6);
  return spec;
}

std::string ModelSpec::id() const {
  return std::string(category_name(category)) + "." + std::to_string(mean_config) + "." + std::to_string(cov_config);
}

std::size_t ModelSpec::order() const noexcept {
  return (category == Category::I || category == Category::III) ? 2 : 3;
}

std::size_t ModelSpec::dim() const noexcept {
  return (category == Category::I || category == Category::II) ? 2 : 3;
}

std::size_t ModelSpec::sample_size() const noexcept { return category == Category::I ? 200 : 300; }

std::size_t ModelSpec::index() const noexcept {
  return (static_cast<std::size_t>(category) - 1) * 18 + static_cast<std::size_t>(mean_config - 1) * 6 +
         static_cast<std::size_t>(cov_config - 1);
}

Rotation3 rotation_3d(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  return {{
      {cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg},
      {cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg},
      {-sb, sa * cb, ca * cb},
  }};
}

SpdMatrix build_cov_2d(const CovParams2D& p) {
  if (!(p.lambda1 > 0.0) || !(p.lambda2 > 0.0)) throw PreconditionViolated("eigenvalues must be positive");
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  SpdMatrix m(2);
  m.set(0, 0, c * c * p.lambda1 + s * s * p.lambda2);
  m.set(1, 0, c * s * (p.lambda1 - p.lambda2));
  m.set(1, 1, s * s * p.lambda1 + c * c * p.lambda2);
  snap_zeros(m, std::max(p.lambda1, p.lambda2));
  return m;
}

SpdMatrix build_cov_3d(const CovParams3D& p) {
  for (double l : p.lambdas) {
    if (!(l > 0.0)) throw PreconditionViolated("eigenvalues must be positive");
  }
  const Rotation3 r = rotation_3d(p.alpha, p.beta, p.gamma);
  SpdMatrix m(3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < 3; ++k) v += r[i][k] * p.lambdas[k] * r[j][k];
      m.set(i, j, v);
    }
  }
  snap_zeros(m, *std::max_element(p.lambdas.begin(), p.lambdas.end()));
  return m;
}

MixingDistribution resolve_model(const ModelSpec& spec) {
  if (spec.mean_config < 1 || spec.mean_config > 3 || spec.cov_config < 1 || spec.cov_config > 6) {
    throw UnknownModel("model configuration out of range: " + spec.id());
  }
  const auto m = static_cast<std::size_t>(spec.mean_config - 1);
  const auto c = static_cast<std::size_t>(spec.cov_config - 1);
  switch (spec.category) {
    case Category::I:
      return assemble(kWeights2, kMeansI[m], kCovI[c]);
    case Category::II:
      return assemble(kWeights3, kMeansII[m], kCovII[c]);
    case Category::III:
      return assemble(kWeights2, kMeansIII[m], kCovIII[c]);
    case Category::IV:
      return assemble(kWeights3, kMeansIV[m], kCovIV[c]);
  }
  throw UnknownModel("unknown category in " + spec.id());
}

std::vector<ModelSpec> all_models() {
  std::vector<ModelSpec> out;
  out.reserve(72);
  for (Category cat : {Category::I, Category::II, Category::III, Category::IV}) {
    for (int m = 1; m <= 3; ++m) {
      for (int c = 1; c <= 6; ++c) out.push_back({cat, m, c});
    }
  }
  return out;
}

Dataset sample(const MixingDistribution& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionViolated("sample size must be >= 1");
  const std::size_t d = g.dim();
  std::vector<double> weights;
  std::vector<CholeskyFactor> factors;
  for (const Component& c : g.components()) {
    weights.push_back(c.weight);
    factors.push_back(cholesky(c.cov));
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values;
  values.reserve(n * d);
  Vector z(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = pick(rng);
    for (double& v : z) v = normal(rng);
    const Vector lz = factors[j].multiply(z);
    for (std::size_t k = 0; k < d; ++k) values.push_back(g[j].mean[k] + lz[k]);
  }
  return Dataset(d, std::move(values));
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t model_index, std::size_t replication) {
  return base_seed * 1'000'000ULL + static_cast<std::uint64_t>(model_index) * 1'000ULL +
         static_cast<std::uint64_t>(replication);
}

std::vector<MixingDistribution> make_starts(const Dataset& data, const MixingDistribution& truth,
                                            std::uint64_t seed) {
  if (truth.dim() != data.dim()) throw DimensionMismatch("make_starts: truth and data dimension differ");
  const Vector sd = coordinate_sd(data);
  std::mt19937_64 rng = derived_engine(seed, kStartStreamTag);

  std::vector<MixingDistribution> starts;
  starts.reserve(10);
  starts.push_back(truth);
  for (int s = 0; s < 4; ++s) {
    std::vector<Component> comps = truth.components();
    for (Component& c : comps) c.mean = perturbed(c.mean, sd, rng);
    starts.emplace_back(std::move(comps));
  }

  const Vector mean = sample_mean(data);
  const SpdMatrix cov = sample_covariance(data);
  const std::size_t p = truth.order();
  for (int s = 0; s < 5; ++s) {
    std::vector<Component> comps;
    comps.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
      comps.push_back({1.0 / static_cast<double>(p), perturbed(mean, sd, rng), cov});
    }
    starts.emplace_back(std::move(comps));
  }
  return starts;
}

std::vector<MixingDistribution> make_data_starts(const Dataset& data, std::size_t order, std::uint64_t seed,
                                                 std::size_t count) {
  if (order == 0) throw PreconditionViolated("mixture order must be >= 1");
  if (count == 0) throw PreconditionViolated("need at least one start");
  const Vector sd = coordinate_sd(data);
  const Vector mean = sample_mean(data);
  const SpdMatrix cov = sample_covariance(data);
  std::mt19937_64 rng = derived_engine(seed, kStartStreamTag);
  std::vector<MixingDistribution> starts;
  starts.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<Component> comps;
    comps.reserve(order);
    for (std::size_t j = 0; j < order; ++j) {
      comps.push_back({1.0 / static_cast<double>(order), s == 0 ? mean : perturbed(mean, sd, rng), cov});
    }
    starts.emplace_back(std::move(comps));
  }
  return starts;
}

}  // namespace pmle
