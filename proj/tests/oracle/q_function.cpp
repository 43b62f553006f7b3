#include "oracle/q_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pmle::oracle {

Eigen::MatrixXd to_eigen(const SpdMatrix& m) {
  const auto d = static_cast<Eigen::Index>(m.dim());
  Eigen::MatrixXd out(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return out;
}

Eigen::MatrixXd data_matrix(const Dataset& data) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.dim()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < data.dim(); ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = data.row(i)[k];
  }
  return x;
}

namespace {

struct Kernel {
  Eigen::VectorXd mu;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  Eigen::MatrixXd inverse;
  double log_det = 0.0;
};

Kernel make_kernel(const Component& c) {
  Kernel k;
  k.mu = Eigen::Map<const Eigen::VectorXd>(c.mean.data(), static_cast<Eigen::Index>(c.mean.size()));
  const Eigen::MatrixXd sigma = to_eigen(c.cov);
  k.ldlt.compute(sigma);
  k.log_det = k.ldlt.vectorD().array().log().sum();
  k.inverse = k.ldlt.solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
  return k;
}

double log_phi(const Kernel& k, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = x - k.mu;
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * k.log_det - 0.5 * r.dot(k.ldlt.solve(r));
}

}  // namespace

double q_function(const Dataset& data, const Responsibilities& resp, const MixingDistribution& g, double strength,
                  const SpdMatrix& anchor) {
  const Eigen::MatrixXd x = data_matrix(data);
  const Eigen::MatrixXd s = to_eigen(anchor);
  double q = 0.0;
  for (std::size_t j = 0; j < g.order(); ++j) {
    const Kernel k = make_kernel(g[j]);
    const double log_w = std::log(std::max(g[j].weight, 1e-300));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double r = resp(static_cast<std::size_t>(i), j);
      if (r == 0.0) continue;
      q += r * (log_w + log_phi(k, x.row(i).transpose()));
    }
    q -= strength * ((s * k.inverse).trace() + k.log_det);
  }
  return q;
}

double log_likelihood(const Dataset& data, const MixingDistribution& g) {
  const Eigen::MatrixXd x = data_matrix(data);
  std::vector<Kernel> kernels;
  for (const Component& c : g.components()) kernels.push_back(make_kernel(c));
  double total = 0.0;
  std::vector<double> terms(g.order());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.order(); ++j) {
      terms[j] = g[j].weight > 0.0 ? std::log(g[j].weight) + log_phi(kernels[j], x.row(i).transpose())
                                   : -std::numeric_limits<double>::infinity();
      hi = std::max(hi, terms[j]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - hi);
    total += hi + std::log(acc);
  }
  return total;
}

}  // namespace pmle::oracle
