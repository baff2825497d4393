#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "erb/assignment.hpp"
#include "erb/density.hpp"
#include "erb/kdtree.hpp"
#include "erb/numeric.hpp"
#include "erb/rng.hpp"
#include "erb/sample_matrix.hpp"

namespace erb {

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  std::int64_t count = 0;
};

struct QuadratureBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Axis-aligned box covering the density's mass out to `sigmas` standard
// deviations per axis.
inline QuadratureBox default_box(const DensityHandle& density, double sigmas) {
  QuadratureBox box;
  box.lo.resize(density.dimension);
  box.hi.resize(density.dimension);
  for (int i = 0; i < density.dimension; ++i) {
    const double sd = std::sqrt(density.covariance(i, i));
    box.lo(i) = density.mean(i) - sigmas * sd;
    box.hi(i) = density.mean(i) + sigmas * sd;
  }
  return box;
}

// Midpoint-rule differential entropy -sum f ln f dV on a tensor grid.
// Dimensions 1 and 2 only; that is all the oracle duty requires. std_error
// is a truncation bound driven by the observed mass defect.
inline EstimateWithError entropy_quadrature(const DensityHandle& density, const QuadratureBox& box,
                                            std::int64_t points_per_axis) {
  if (density.dimension > 2) {
    throw InvalidInput("entropy_quadrature: only dimensions 1 and 2 are supported");
  }
  if (points_per_axis < 2) throw InvalidInput("entropy_quadrature: need at least 2 points");
  if (box.lo.size() != density.dimension || box.hi.size() != density.dimension) {
    throw InvalidInput("entropy_quadrature: box dimension mismatch");
  }

  PairwiseAccumulator mass_acc;
  PairwiseAccumulator entropy_acc;
  if (density.dimension == 1) {
    const double dx = (box.hi(0) - box.lo(0)) / static_cast<double>(points_per_axis);
    Eigen::VectorXd x(1);
    for (std::int64_t i = 0; i < points_per_axis; ++i) {
      x(0) = box.lo(0) + (static_cast<double>(i) + 0.5) * dx;
      const double lf = density.log_pdf(x);
      const double f = std::exp(lf);
      mass_acc.add(f * dx);
      if (f > 0.0) entropy_acc.add(-f * lf * dx);
    }
  } else {
    const double dx = (box.hi(0) - box.lo(0)) / static_cast<double>(points_per_axis);
    const double dy = (box.hi(1) - box.lo(1)) / static_cast<double>(points_per_axis);
    const double cell = dx * dy;
    Eigen::VectorXd x(2);
    for (std::int64_t i = 0; i < points_per_axis; ++i) {
      x(0) = box.lo(0) + (static_cast<double>(i) + 0.5) * dx;
      for (std::int64_t j = 0; j < points_per_axis; ++j) {
        x(1) = box.lo(1) + (static_cast<double>(j) + 0.5) * dy;
        const double lf = density.log_pdf(x);
        const double f = std::exp(lf);
        mass_acc.add(f * cell);
        if (f > 0.0) entropy_acc.add(-f * lf * cell);
      }
    }
  }

  const double mass = mass_acc.total();
  const double defect = std::abs(1.0 - mass);
  if (defect > 1e-3) {
    throw InvalidInput("entropy_quadrature: box too small, mass defect " + std::to_string(defect));
  }
  EstimateWithError e;
  e.value = entropy_acc.total();
  // tail entropy scales like defect * ln(1/defect)
  e.std_error = defect > 0.0 ? defect * (1.0 - std::log(defect)) : 0.0;
  e.method = "quadrature";
  e.count = density.dimension == 1 ? points_per_axis : points_per_axis * points_per_axis;
  return e;
}

namespace detail {

// Returns the estimate; *duplicates counts points whose nearest other point
// coincides with them exactly (those poison the log distances).
inline double knn_estimate_from_points(const Eigen::MatrixXd& points, int k,
                                       std::int64_t* duplicates) {
  const std::int64_t count = points.rows();
  const int dim = static_cast<int>(points.cols());
  const KdTree tree(points);
  PairwiseAccumulator log_dist;
  std::int64_t dup = 0;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto d = tree.neighbor_distances(i, k);
    if (d.nearest <= 0.0) {
      ++dup;
      continue;
    }
    log_dist.add(std::log(d.kth));
  }
  if (duplicates) *duplicates = dup;
  if (dup > 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(dim) / static_cast<double>(count) * log_dist.total() +
         log_unit_ball_volume(dim) + digamma(static_cast<double>(count)) -
         digamma(static_cast<double>(k));
}

}  // namespace detail

// Nearest-neighbor differential entropy: the classic k-NN estimator built
// from k-th neighbor distances, the unit-ball volume and digamma terms.
// std_error comes from 20 random half-sample refits (half-sample variance is
// about twice the full-sample variance, hence the sqrt(2) deflation).
inline EstimateWithError entropy_knn(const SampleMatrix& samples, int k = 4) {
  const std::int64_t count = samples.count();
  if (k < 1) throw InvalidInput("entropy_knn: k must be >= 1");
  if (count < 50 * static_cast<std::int64_t>(k)) {
    throw InvalidInput("entropy_knn: need at least 50*k samples, got " + std::to_string(count));
  }

  Eigen::MatrixXd points = samples.values;
  bool jittered = false;
  std::int64_t duplicates = 0;
  double value = detail::knn_estimate_from_points(points, k, &duplicates);
  if (duplicates > 0) {
    if (duplicates > count / 100) {
      throw InvalidInput("entropy_knn: more than 1% duplicate samples (" +
                         std::to_string(duplicates) + " of " + std::to_string(count) + ")");
    }
    // break ties far below any tolerance in use
    const CounterRng jitter_rng{derive_seed(samples.seed, 0x6a177e5)};
    std::uint64_t ctr = 0;
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      const double scale =
          1e-12 * std::max(1.0, std::sqrt(points.col(c).squaredNorm() / points.rows()));
      for (Eigen::Index r = 0; r < points.rows(); ++r) {
        points(r, c) += scale * (2.0 * jitter_rng.uniform(ctr++) - 1.0);
      }
    }
    jittered = true;
    value = detail::knn_estimate_from_points(points, k, &duplicates);
    if (duplicates > 0) throw InvalidInput("entropy_knn: duplicates survived jitter");
  }

  constexpr int kSplits = 20;
  const std::int64_t half = count / 2;
  std::vector<double> split_estimates;
  split_estimates.reserve(kSplits);
  std::vector<std::int64_t> order(static_cast<std::size_t>(count));
  for (int s = 0; s < kSplits; ++s) {
    std::iota(order.begin(), order.end(), 0);
    const CounterRng split_rng{derive_seed(samples.seed, 0x4a1f0000ULL + static_cast<std::uint64_t>(s))};
    for (std::int64_t i = 0; i < half; ++i) {
      const std::uint64_t span = static_cast<std::uint64_t>(count - i);
      const std::int64_t j =
          i + static_cast<std::int64_t>(split_rng.bits(static_cast<std::uint64_t>(i)) % span);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    Eigen::MatrixXd subset(half, points.cols());
    for (std::int64_t i = 0; i < half; ++i) {
      subset.row(i) = points.row(order[static_cast<std::size_t>(i)]);
    }
    split_estimates.push_back(detail::knn_estimate_from_points(subset, k, nullptr));
  }
  double mean_split = 0.0;
  for (double v : split_estimates) mean_split += v;
  mean_split /= kSplits;
  double var_split = 0.0;
  for (double v : split_estimates) var_split += (v - mean_split) * (v - mean_split);
  var_split /= (kSplits - 1);

  EstimateWithError e;
  e.value = value;
  e.std_error = std::sqrt(var_split / 2.0);
  e.method = jittered ? "knn_k" + std::to_string(k) + "+jitter" : "knn_k" + std::to_string(k);
  e.seed = samples.seed;
  e.count = count;
  return e;
}

// Monte-Carlo KL divergence D(f||g) = E_f[ln f - ln g] over samples drawn
// from f.
inline EstimateWithError kl_monte_carlo(const DensityHandle& density_f,
                                        const DensityHandle& density_g,
                                        const SampleMatrix& samples_from_f) {
  const std::int64_t count = samples_from_f.count();
  if (count < 1) throw InvalidInput("kl_monte_carlo: need at least one sample");
  if (density_f.dimension != samples_from_f.dimension() ||
      density_g.dimension != samples_from_f.dimension()) {
    throw InvalidInput("kl_monte_carlo: dimension mismatch");
  }
  PairwiseAccumulator sum;
  PairwiseAccumulator sum_sq;
  Eigen::VectorXd x(samples_from_f.dimension());
  for (std::int64_t i = 0; i < count; ++i) {
    x = samples_from_f.values.row(i).transpose();
    const double ratio = density_f.log_pdf(x) - density_g.log_pdf(x);
    if (!std::isfinite(ratio)) {
      throw NumericalFailure("kl_monte_carlo: non-finite log ratio at sample " + std::to_string(i));
    }
    sum.add(ratio);
    sum_sq.add(ratio * ratio);
  }
  const double mean = sum.total() / static_cast<double>(count);
  const double var = std::max(0.0, sum_sq.total() / static_cast<double>(count) - mean * mean);
  EstimateWithError e;
  e.value = mean;
  e.std_error = std::sqrt(var / static_cast<double>(count));
  e.method = "kl_monte_carlo";
  e.seed = samples_from_f.seed;
  e.count = count;
  return e;
}

// 2-Wasserstein distance between two densities on R by the quantile
// coupling: W2^2 = integral over u of (F^{-1}(u) - G^{-1}(u))^2. The 1D
// optimal coupling is monotone, so this is exact up to discretization.
inline double w2_quantile_1d(const DensityHandle& density_f, const DensityHandle& density_g,
                             std::int64_t quantile_grid, std::int64_t cdf_points = (1 << 21)) {
  if (density_f.dimension != 1 || density_g.dimension != 1) {
    throw InvalidInput("w2_quantile_1d: densities must be one-dimensional");
  }
  if (quantile_grid < 2) throw InvalidInput("w2_quantile_1d: quantile grid too small");

  // common bounding box wide enough for both
  const double sf = std::sqrt(density_f.covariance(0, 0));
  const double sg = std::sqrt(density_g.covariance(0, 0));
  const double lo = std::min(density_f.mean(0) - 45.0 * sf, density_g.mean(0) - 45.0 * sg);
  const double hi = std::max(density_f.mean(0) + 45.0 * sf, density_g.mean(0) + 45.0 * sg);
  const double dx = (hi - lo) / static_cast<double>(cdf_points);

  const auto build_cdf = [&](const DensityHandle& density, std::vector<double>& cdf) {
    cdf.resize(static_cast<std::size_t>(cdf_points));
    Eigen::VectorXd x(1);
    PairwiseAccumulator acc;
    for (std::int64_t i = 0; i < cdf_points; ++i) {
      x(0) = lo + (static_cast<double>(i) + 0.5) * dx;
      const double f = std::exp(density.log_pdf(x));
      // cdf at the cell midpoint: everything before the cell plus half of it
      cdf[static_cast<std::size_t>(i)] = acc.total() + 0.5 * f * dx;
      acc.add(f * dx);
    }
    const double defect = std::abs(1.0 - acc.total());
    if (defect > 1e-8) {
      throw InvalidInput("w2_quantile_1d: mass defect " + std::to_string(defect) +
                         " exceeds 1e-8; bounding box too small");
    }
  };
  std::vector<double> cdf_f;
  std::vector<double> cdf_g;
  build_cdf(density_f, cdf_f);
  build_cdf(density_g, cdf_g);

  const auto invert = [&](const std::vector<double>& cdf, std::int64_t& cursor, double u) {
    while (cursor + 1 < cdf_points && cdf[static_cast<std::size_t>(cursor + 1)] < u) ++cursor;
    const double x0 = lo + (static_cast<double>(cursor) + 0.5) * dx;
    if (cursor + 1 >= cdf_points) return x0;
    const double c0 = cdf[static_cast<std::size_t>(cursor)];
    const double c1 = cdf[static_cast<std::size_t>(cursor + 1)];
    if (u <= c0 || c1 <= c0) return x0;
    return x0 + dx * (u - c0) / (c1 - c0);
  };

  PairwiseAccumulator acc;
  std::int64_t cursor_f = 0;
  std::int64_t cursor_g = 0;
  for (std::int64_t j = 0; j < quantile_grid; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(quantile_grid);
    const double qf = invert(cdf_f, cursor_f, u);
    const double qg = invert(cdf_g, cursor_g, u);
    acc.add((qf - qg) * (qf - qg));
  }
  return std::sqrt(acc.total() / static_cast<double>(quantile_grid));
}

namespace detail {

inline Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, const char* who) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure(std::string(who) + ": eigensolver did not converge");
  }
  Eigen::VectorXd evals = solver.eigenvalues();
  const double scale = std::max(1.0, std::abs(evals(evals.size() - 1)));
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) < -1e-9 * scale) {
      throw InvalidInput(std::string(who) + ": covariance is indefinite");
    }
    evals(i) = std::sqrt(std::max(0.0, evals(i)));
  }
  return solver.eigenvectors() * evals.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace detail

// Closed-form Gaussian W2:
// sqrt(||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sb^{1/2} Sa Sb^{1/2})^{1/2})).
inline double w2_gaussian_closed_form(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                                      const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
  if (mean_a.size() != mean_b.size() || cov_a.rows() != cov_b.rows()) {
    throw InvalidInput("w2_gaussian_closed_form: dimension mismatch");
  }
  const Eigen::MatrixXd root_b = detail::symmetric_sqrt(cov_b, "w2_gaussian_closed_form");
  const Eigen::MatrixXd inner = root_b * cov_a * root_b;
  const Eigen::MatrixXd cross = detail::symmetric_sqrt(inner, "w2_gaussian_closed_form");
  const double tr = cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
  const double sq = (mean_a - mean_b).squaredNorm() + std::max(0.0, tr);
  return std::sqrt(sq);
}

// Exact empirical W2 between two equal-size clouds: assignment problem on
// squared distances. Upper-bounds the population W2 up to sampling error.
inline double w2_empirical(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.count() != b.count()) {
    throw InvalidInput("w2_empirical: sample counts differ");
  }
  if (a.dimension() != b.dimension()) {
    throw InvalidInput("w2_empirical: dimensions differ");
  }
  const std::int64_t m = a.count();
  if (m < 1) throw InvalidInput("w2_empirical: empty samples");
  if (m > 2048) {
    throw InvalidInput("w2_empirical: count " + std::to_string(m) +
                       " exceeds the assignment-problem budget of 2048");
  }
  std::vector<double> cost(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    for (std::int64_t j = 0; j < m; ++j) {
      cost[static_cast<std::size_t>(i) * m + j] = (a.values.row(i) - b.values.row(j)).squaredNorm();
    }
  }
  const auto match = solve_assignment(cost, static_cast<int>(m));
  return std::sqrt(assignment_cost(cost, static_cast<int>(m), match) / static_cast<double>(m));
}

}  // namespace erb
