#include "oracle/numeric_maximizer.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <stdexcept>

#include "oracle/q_function.hpp"

namespace pmle::oracle {

namespace {

struct Problem {
  const Dataset* data;
  const Responsibilities* resp;
  std::size_t order;
  std::size_t dim;
  double strength;
  const SpdMatrix* anchor;

  std::size_t tri() const { return dim * (dim + 1) / 2; }
  std::size_t size() const { return (order - 1) + order * (dim + tri()); }
};

MixingDistribution decode(const Problem& pb, const gsl_vector* v) {
  std::vector<double> logits(pb.order, 0.0);
  for (std::size_t j = 1; j < pb.order; ++j) logits[j] = gsl_vector_get(v, j - 1);
  double hi = logits[0];
  for (double l : logits) hi = std::max(hi, l);
  double z = 0.0;
  for (double l : logits) z += std::exp(l - hi);

  std::vector<Component> comps(pb.order);
  std::size_t at = pb.order - 1;
  for (std::size_t j = 0; j < pb.order; ++j) {
    comps[j].weight = std::exp(logits[j] - hi) / z;
    comps[j].mean.resize(pb.dim);
    for (std::size_t k = 0; k < pb.dim; ++k) comps[j].mean[k] = gsl_vector_get(v, at++);
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pb.dim), static_cast<Eigen::Index>(pb.dim));
    for (std::size_t r = 0; r < pb.dim; ++r) {
      for (std::size_t c = 0; c <= r; ++c) {
        const double raw = gsl_vector_get(v, at++);
        l(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = r == c ? std::exp(raw) : raw;
      }
    }
    const Eigen::MatrixXd sigma = l * l.transpose();
    SpdMatrix m(pb.dim);
    for (std::size_t r = 0; r < pb.dim; ++r) {
      for (std::size_t c = 0; c <= r; ++c) m.set(r, c, sigma(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    comps[j].cov = m;
  }
  // Renormalize exactly so the mixture constructor's tolerance is never an issue.
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return MixingDistribution(std::move(comps));
}

double negative_q(const gsl_vector* v, void* params) {
  const auto& pb = *static_cast<const Problem*>(params);
  return -q_function(*pb.data, *pb.resp, decode(pb, v), pb.strength, *pb.anchor);
}

void gradient(const gsl_vector* v, void* params, gsl_vector* g) {
  constexpr double h = 1e-6;
  gsl_vector* work = gsl_vector_alloc(v->size);
  gsl_vector_memcpy(work, v);
  for (std::size_t k = 0; k < v->size; ++k) {
    const double x0 = gsl_vector_get(v, k);
    gsl_vector_set(work, k, x0 + h);
    const double fp = negative_q(work, params);
    gsl_vector_set(work, k, x0 - h);
    const double fm = negative_q(work, params);
    gsl_vector_set(work, k, x0);
    gsl_vector_set(g, k, (fp - fm) / (2.0 * h));
  }
  gsl_vector_free(work);
}

void value_and_gradient(const gsl_vector* v, void* params, double* f, gsl_vector* g) {
  *f = negative_q(v, params);
  gradient(v, params, g);
}

}  // namespace

MaximizerResult maximize_q(const Dataset& data, const Responsibilities& resp, std::size_t order, double strength,
                           const SpdMatrix& anchor) {
  Problem pb{&data, &resp, order, data.dim(), strength, &anchor};
  const std::size_t n = pb.size();

  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector_set_zero(x);
  const Vector mean = sample_mean(data);
  const Eigen::MatrixXd l0 = to_eigen(anchor).llt().matrixL();
  std::size_t at = order - 1;
  for (std::size_t j = 0; j < order; ++j) {
    for (std::size_t k = 0; k < pb.dim; ++k) gsl_vector_set(x, at++, mean[k]);
    for (std::size_t r = 0; r < pb.dim; ++r) {
      for (std::size_t c = 0; c <= r; ++c) {
        const double v = l0(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        gsl_vector_set(x, at++, r == c ? std::log(v) : v);
      }
    }
  }

  gsl_multimin_function_fdf fn;
  fn.n = n;
  fn.f = &negative_q;
  fn.df = &gradient;
  fn.fdf = &value_and_gradient;
  fn.params = &pb;

  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
  MaximizerResult out{MixingDistribution({Component{1.0, Vector(pb.dim, 0.0), SpdMatrix::identity(pb.dim)}})};
  // Restarts refresh the BFGS curvature estimate after line-search stalls.
  for (int round = 0; round < 20; ++round) {
    gsl_multimin_fdfminimizer_set(s, &fn, x, 1e-2, 0.1);
    int status = GSL_CONTINUE;
    for (int it = 0; it < 5000 && status == GSL_CONTINUE; ++it) {
      ++out.iterations;
      if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
      status = gsl_multimin_test_gradient(s->gradient, 1e-10);
    }
    gsl_vector_memcpy(x, s->x);
    out.gradient_norm = gsl_blas_dnrm2(s->gradient);
    if (status == GSL_SUCCESS) break;
  }
  out.estimate = decode(pb, x);
  out.q = -negative_q(x, &pb);
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  return out;
}

}  // namespace pmle::oracle
