#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "erb/numeric.hpp"

namespace erb {

// A density on R^n exposed through evaluators. The gradient may be analytic;
// when absent, grad_log_pdf falls back to central differences with a step
// that scales with ||x|| to stay accurate in far tails.
struct DensityHandle {
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&)> log_density;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  double log_pdf(const Eigen::VectorXd& x) const { return log_density(x); }

  Eigen::VectorXd grad_log_pdf(const Eigen::VectorXd& x) const {
    if (gradient) return gradient(x);
    return finite_difference_gradient(x);
  }

  Eigen::VectorXd finite_difference_gradient(const Eigen::VectorXd& x) const {
    const double h = 1e-5 * (1.0 + x.norm());
    Eigen::VectorXd g(dimension);
    Eigen::VectorXd p = x;
    for (int i = 0; i < dimension; ++i) {
      const double xi = x(i);
      p(i) = xi + h;
      const double up = log_density(p);
      p(i) = xi - h;
      const double down = log_density(p);
      p(i) = xi;
      g(i) = (up - down) / (2.0 * h);
    }
    return g;
  }
};

namespace detail {

struct GaussianCore {
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm = 0.0;  // -(n/2) ln(2 pi) - (1/2) ln det
};

inline std::shared_ptr<GaussianCore> make_gaussian_core(Eigen::VectorXd mean,
                                                        const Eigen::MatrixXd& cov) {
  auto core = std::make_shared<GaussianCore>();
  core->mean = std::move(mean);
  core->llt.compute(cov);
  if (core->llt.info() != Eigen::Success) {
    throw NumericalFailure("gaussian density: covariance is not positive definite");
  }
  const auto& l = core->llt.matrixLLT();
  double half_log_det = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) half_log_det += std::log(l(i, i));
  core->log_norm = -0.5 * static_cast<double>(cov.rows()) * std::log(kTwoPi) - half_log_det;
  return core;
}

inline double gaussian_log_pdf(const GaussianCore& core, const Eigen::VectorXd& x) {
  const Eigen::VectorXd d = x - core.mean;
  const Eigen::VectorXd w = core.llt.matrixL().solve(d);
  return core.log_norm - 0.5 * w.squaredNorm();
}

}  // namespace detail

inline DensityHandle make_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (mean.size() != cov.rows() || cov.rows() != cov.cols()) {
    throw InvalidInput("make_gaussian: mean/covariance dimensions disagree");
  }
  auto core = detail::make_gaussian_core(mean, cov);
  DensityHandle h;
  h.dimension = static_cast<int>(mean.size());
  h.mean = std::move(mean);
  h.covariance = std::move(cov);
  h.log_density = [core](const Eigen::VectorXd& x) { return detail::gaussian_log_pdf(*core, x); };
  h.gradient = [core](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return -core->llt.solve(x - core->mean);
  };
  return h;
}

inline DensityHandle make_gaussian_1d(double mean, double variance) {
  Eigen::VectorXd m(1);
  m << mean;
  Eigen::MatrixXd c(1, 1);
  c << variance;
  return make_gaussian(std::move(m), std::move(c));
}

inline DensityHandle make_standard_gaussian(int n) {
  return make_gaussian(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n));
}

// Standard logistic density e^x / (1 + e^x)^2; entropy 2 nats, variance
// pi^2/3, |d/dx ln f| = |tanh(x/2)| < 1.
inline DensityHandle make_logistic() {
  DensityHandle h;
  h.dimension = 1;
  h.mean = Eigen::VectorXd::Zero(1);
  h.covariance = Eigen::MatrixXd::Constant(1, 1, M_PI * M_PI / 3.0);
  h.log_density = [](const Eigen::VectorXd& x) {
    const double t = -std::abs(x(0));
    // ln f = -|x| - 2 ln(1 + e^{-|x|}), the overflow-safe symmetric form
    return t - 2.0 * std::log1p(std::exp(t));
  };
  h.gradient = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g(1);
    g(0) = -std::tanh(0.5 * x(0));
    return g;
  };
  return h;
}

// Gaussian mixture with arbitrary component means/covariances. Log-density
// by log-sum-exp; gradient is the responsibility-weighted mix of component
// gradients. Mean and covariance fields are exact mixture moments.
inline DensityHandle make_gaussian_mixture(std::vector<double> weights,
                                           std::vector<Eigen::VectorXd> means,
                                           std::vector<Eigen::MatrixXd> covs) {
  const std::size_t k = weights.size();
  if (k == 0 || means.size() != k || covs.size() != k) {
    throw InvalidInput("make_gaussian_mixture: component lists disagree");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidInput("make_gaussian_mixture: weights must be positive");
    wsum += w;
  }

  struct MixtureCore {
    std::vector<double> log_w;
    std::vector<std::shared_ptr<detail::GaussianCore>> comps;
  };
  auto core = std::make_shared<MixtureCore>();
  core->log_w.resize(k);
  core->comps.resize(k);
  const int n = static_cast<int>(means[0].size());
  for (std::size_t i = 0; i < k; ++i) {
    core->log_w[i] = std::log(weights[i] / wsum);
    core->comps[i] = detail::make_gaussian_core(means[i], covs[i]);
  }

  DensityHandle h;
  h.dimension = n;
  h.mean = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < k; ++i) h.mean += (weights[i] / wsum) * means[i];
  h.covariance = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < k; ++i) {
    h.covariance += (weights[i] / wsum) * (covs[i] + means[i] * means[i].transpose());
  }
  h.covariance -= h.mean * h.mean.transpose();

  h.log_density = [core](const Eigen::VectorXd& x) {
    double m = -std::numeric_limits<double>::infinity();
    const std::size_t k = core->comps.size();
    std::vector<double> terms(k);
    for (std::size_t i = 0; i < k; ++i) {
      terms[i] = core->log_w[i] + detail::gaussian_log_pdf(*core->comps[i], x);
      if (terms[i] > m) m = terms[i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += std::exp(terms[i] - m);
    return m + std::log(acc);
  };
  h.gradient = [core, n](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    double m = -std::numeric_limits<double>::infinity();
    const std::size_t k = core->comps.size();
    std::vector<double> terms(k);
    for (std::size_t i = 0; i < k; ++i) {
      terms[i] = core->log_w[i] + detail::gaussian_log_pdf(*core->comps[i], x);
      if (terms[i] > m) m = terms[i];
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < k; ++i) denom += std::exp(terms[i] - m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < k; ++i) {
      const double resp = std::exp(terms[i] - m) / denom;
      if (resp > 0.0) {
        g += resp * (-core->comps[i]->llt.solve(x - core->comps[i]->mean));
      }
    }
    return g;
  };
  return h;
}

// Gaussian with the same mean and covariance: the entropy maximizer under
// matched first and second moments.
inline DensityHandle matched_gaussian(const DensityHandle& f) {
  return make_gaussian(f.mean, f.covariance);
}

}  // namespace erb
