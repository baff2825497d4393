#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "erb/autocovariance.hpp"
#include "erb/numeric.hpp"
#include "erb/regularity.hpp"
#include "erb/rng.hpp"
#include "erb/sample_matrix.hpp"
#include "erb/spectral_density.hpp"

namespace erb {

// Symmetric Toeplitz covariance of a length-n block: entry (k,l) = r(|k-l|).
struct ToeplitzCovariance {
  std::vector<double> first_row;  // r(0) .. r(n-1)

  int n() const { return static_cast<int>(first_row.size()); }

  Eigen::MatrixXd dense() const {
    const int size = n();
    Eigen::MatrixXd m(size, size);
    for (int k = 0; k < size; ++k) {
      for (int l = 0; l < size; ++l) {
        m(k, l) = first_row[static_cast<std::size_t>(k > l ? k - l : l - k)];
      }
    }
    return m;
  }
};

inline ToeplitzCovariance toeplitz_from_first_row(std::vector<double> first_row) {
  if (first_row.empty()) throw InvalidInput("toeplitz covariance: first row must be non-empty");
  return ToeplitzCovariance{std::move(first_row)};
}

inline ToeplitzCovariance build_covariance(const AutocovarianceSpec& spec, int n) {
  if (n < 1) throw InvalidInput("build_covariance: n must be >= 1");
  std::vector<double> row(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) row[static_cast<std::size_t>(l)] = spec(l);
  return ToeplitzCovariance{std::move(row)};
}

namespace detail {

// Textbook in-place Cholesky used only to locate the failing pivot once
// Eigen's factorization has reported a non-PD matrix.
inline int failing_pivot(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return j;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return -1;
}

inline Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const ToeplitzCovariance& cov,
                                                     const char* who) {
  const Eigen::MatrixXd dense = cov.dense();
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success) {
    const int pivot = failing_pivot(dense);
    throw NumericalFailure(std::string(who) + ": covariance is not positive definite (pivot " +
                           std::to_string(pivot) + " of " + std::to_string(cov.n()) + ")");
  }
  return llt;
}

}  // namespace detail

// (1/2n) ln((2 pi e)^n det R) via the Cholesky log-determinant: the exact
// per-coordinate entropy of a length-n Gaussian block.
inline double gaussian_entropy_per_coordinate(const ToeplitzCovariance& cov) {
  const auto llt = detail::cholesky_or_throw(cov, "gaussian_entropy_per_coordinate");
  const auto& l = llt.matrixLLT();
  PairwiseAccumulator acc;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc.add(std::log(l(i, i)));
  return kGaussEntropyNats + acc.total() / static_cast<double>(cov.n());
}

// Levinson-Durbin route to the same quantity: det R = product of the
// forward prediction-error variances. Independent of the dense
// factorization; exercises the Toeplitz structure directly.
inline double levinson_entropy_per_coordinate(const ToeplitzCovariance& cov) {
  const int n = cov.n();
  const std::vector<double>& r = cov.first_row;
  if (!(r[0] > 0.0)) {
    throw NumericalFailure("levinson_entropy_per_coordinate: r(0) must be > 0");
  }
  PairwiseAccumulator log_errors;
  log_errors.add(std::log(r[0]));
  std::vector<double> a;  // prediction coefficients
  double err = r[0];
  for (int k = 1; k < n; ++k) {
    double acc = r[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) {
      acc -= a[static_cast<std::size_t>(j - 1)] * r[static_cast<std::size_t>(k - j)];
    }
    const double reflection = acc / err;
    std::vector<double> next(static_cast<std::size_t>(k));
    for (int j = 1; j < k; ++j) {
      next[static_cast<std::size_t>(j - 1)] = a[static_cast<std::size_t>(j - 1)] -
                                              reflection * a[static_cast<std::size_t>(k - 1 - j)];
    }
    next[static_cast<std::size_t>(k - 1)] = reflection;
    a = std::move(next);
    err *= (1.0 - reflection * reflection);
    if (!(err > 0.0)) {
      throw NumericalFailure(
          "levinson_entropy_per_coordinate: covariance is not positive definite (stage " +
          std::to_string(k) + ")");
    }
    log_errors.add(std::log(err));
  }
  return kGaussEntropyNats + 0.5 * log_errors.total() / static_cast<double>(n);
}

// Smallest eigenvalue by a dense symmetric eigensolver.
inline double min_eigenvalue(const ToeplitzCovariance& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov.dense(),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("min_eigenvalue: eigensolver did not converge");
  }
  return solver.eigenvalues()(0);
}

// Per-block constants for the zero-mean Gaussian with this covariance:
// ||grad ln f(x)|| = ||R^{-1} x|| <= ||x|| / lambda_min, so c1 = 1/lambda_min
// and c2 = 0, with no dependence on the block length.
inline RegularityConstants gaussian_regularity_per_n(const ToeplitzCovariance& cov) {
  const double lambda_min = min_eigenvalue(cov);
  if (!(lambda_min > 0.0)) {
    throw NumericalFailure("gaussian_regularity_per_n: covariance is singular");
  }
  return RegularityConstants::fixed(1.0 / lambda_min, 0.0);
}

// n-uniform constants for the Gaussian process: lambda_min(R^(n)) never
// drops below the spectral floor inf S(f), so c1 = 1 / inf S works for every
// block length at once.
inline RegularityConstants gaussian_regularity_process(const AutocovarianceSpec& spec,
                                                       int grid_size = 4096) {
  const SpectralDensity psd = psd_from_autocovariance(spec, grid_size);
  const double floor = psd_extrema(psd).min;
  if (!(floor > 0.0)) {
    throw NumericalFailure(
        "gaussian_regularity_process: spectrum reaches zero; no n-uniform constant exists");
  }
  return RegularityConstants::fixed(1.0 / floor, 0.0);
}

// `count` i.i.d. zero-mean draws with covariance cov, generated as L z with
// z standard normal from the counter stream keyed by `seed`. Bitwise
// reproducible for fixed (seed, count, n) on a given platform.
inline SampleMatrix cholesky_sampler(const ToeplitzCovariance& cov, std::int64_t count,
                                     std::uint64_t seed) {
  if (count < 0) throw InvalidInput("cholesky_sampler: count must be >= 0");
  const int n = cov.n();
  SampleMatrix out;
  out.seed = seed;
  out.provenance = "cholesky_sampler(n=" + std::to_string(n) + ")";
  out.values.resize(static_cast<Eigen::Index>(count), n);
  if (count == 0) return out;

  const auto llt = detail::cholesky_or_throw(cov, "cholesky_sampler");
  const Eigen::MatrixXd l = llt.matrixL();
  const CounterRng rng{seed};
  Eigen::VectorXd z(n);
  for (std::int64_t c = 0; c < count; ++c) {
    const std::uint64_t base = static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(n);
    for (int j = 0; j < n; ++j) z(j) = rng.normal(base + static_cast<std::uint64_t>(j));
    out.values.row(c) = (l * z).transpose();
  }
  return out;
}

}  // namespace erb
