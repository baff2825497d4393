#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>

#include "erb/density.hpp"
#include "erb/numeric.hpp"
#include "erb/rng.hpp"

namespace erb {

enum class C2Growth { constant, sqrt_n };

inline const char* to_string(C2Growth g) {
  return g == C2Growth::constant ? "constant" : "sqrt_n";
}

// Constants certifying the gradient envelope ||grad ln f(x)|| <= c1 ||x|| + c2.
// c2 may grow with the dimension as coefficient * sqrt(n); the growth law is
// recorded so rate bounds can expand it exactly instead of treating c2 as a
// fixed number.
struct RegularityConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  C2Growth growth = C2Growth::constant;
  double sqrt_coefficient = 0.0;  // c2(n) = sqrt_coefficient * sqrt(n) when growth == sqrt_n

  static RegularityConstants fixed(double c1, double c2) {
    if (!(c1 > 0.0)) throw InvalidInput("regularity constants: c1 must be > 0");
    if (!(c2 >= 0.0)) throw InvalidInput("regularity constants: c2 must be >= 0");
    RegularityConstants r;
    r.c1 = c1;
    r.c2 = c2;
    return r;
  }

  static RegularityConstants with_sqrt_growth(double c1, double coefficient, std::int64_t n) {
    if (!(c1 > 0.0)) throw InvalidInput("regularity constants: c1 must be > 0");
    if (!(coefficient >= 0.0)) {
      throw InvalidInput("regularity constants: sqrt_n coefficient must be >= 0");
    }
    if (n < 1) throw InvalidInput("regularity constants: n must be >= 1");
    RegularityConstants r;
    r.c1 = c1;
    r.growth = C2Growth::sqrt_n;
    r.sqrt_coefficient = coefficient;
    r.c2 = coefficient * std::sqrt(static_cast<double>(n));
    return r;
  }

  double c2_at(std::int64_t n) const {
    return growth == C2Growth::sqrt_n ? sqrt_coefficient * std::sqrt(static_cast<double>(n)) : c2;
  }
};

// Constants for a noise-smoothed vector Y = B + Z with Z ~ N(0, v I)
// independent of B: c1 = 3/v and c2 = 4 E||B|| / v (nats). mean_norm_bound
// must dominate E||B||.
inline RegularityConstants smoothing_regularity_constants(double noise_variance,
                                                          double mean_norm_bound) {
  if (!(noise_variance > 0.0)) {
    throw InvalidInput("smoothing regularity: noise variance must be > 0");
  }
  if (!(mean_norm_bound >= 0.0)) {
    throw InvalidInput("smoothing regularity: mean norm bound must be >= 0");
  }
  return RegularityConstants::fixed(3.0 / noise_variance,
                                    4.0 * mean_norm_bound / noise_variance);
}

// Same bound applied to the elementwise-product model B = H .* X with
// E||B||^2 = n r_H(0) r_X(0): c2 grows as sqrt(n) with coefficient
// 4 sqrt(r_H(0) r_X(0)) / v, and the growth law is recorded.
inline RegularityConstants product_smoothing_constants(double noise_variance, double r_h0,
                                                       double r_x0, std::int64_t n) {
  if (!(noise_variance > 0.0)) {
    throw InvalidInput("product smoothing regularity: noise variance must be > 0");
  }
  if (!(r_h0 >= 0.0) || !(r_x0 >= 0.0)) {
    throw InvalidInput("product smoothing regularity: component variances must be >= 0");
  }
  const double coeff = 4.0 * std::sqrt(r_h0 * r_x0) / noise_variance;
  auto r = RegularityConstants::with_sqrt_growth(3.0 / noise_variance, coeff, n);
  return r;
}

// Randomized probe plan: directions uniform on the sphere, radii uniform in
// [0, max_radius]. max_radius <= 0 selects the default 10 sqrt(tr cov).
struct ProbePlan {
  std::int64_t count = 10000;
  double max_radius = 0.0;
  std::uint64_t seed = 1;
};

struct VerificationReport {
  bool pass = false;
  double worst_margin = 0.0;
  Eigen::VectorXd argmin_probe;
  std::int64_t probe_count = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Each probe owns the normal-counter block [index*(dim+1), ...+dim); the
// radius reuses the unconsumed uniform slot of the block's last entry.
inline Eigen::VectorXd probe_point(const CounterRng& rng, std::uint64_t index, int dim,
                                   double max_radius) {
  Eigen::VectorXd dir(dim);
  const std::uint64_t base = index * static_cast<std::uint64_t>(dim + 1);
  for (int i = 0; i < dim; ++i) dir(i) = rng.normal(base + static_cast<std::uint64_t>(i));
  double norm = dir.norm();
  if (norm == 0.0) {
    dir.setZero();
    dir(0) = 1.0;
    norm = 1.0;
  }
  const double radius = max_radius * rng.uniform(2 * (base + static_cast<std::uint64_t>(dim)));
  return (radius / norm) * dir;
}

inline double default_radius(const DensityHandle& density) {
  return 10.0 * std::sqrt(density.covariance.trace());
}

}  // namespace detail

// Probes the gradient envelope ||grad ln f(x)|| <= c1 ||x|| + c2 at random
// points. A failure is a certified counterexample; a pass is evidence over
// the sampled probes, not a proof.
inline VerificationReport verify_regularity(const DensityHandle& density,
                                            const RegularityConstants& constants,
                                            const ProbePlan& plan) {
  if (plan.count < 1) throw InvalidInput("verify_regularity: probe count must be >= 1");
  const double radius = plan.max_radius > 0.0 ? plan.max_radius : detail::default_radius(density);
  const CounterRng rng{plan.seed};

  VerificationReport report;
  report.probe_count = plan.count;
  report.seed = plan.seed;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < plan.count; ++i) {
    const Eigen::VectorXd x =
        detail::probe_point(rng, static_cast<std::uint64_t>(i), density.dimension, radius);
    const Eigen::VectorXd g = density.grad_log_pdf(x);
    if (!g.allFinite()) {
      std::string msg = "verify_regularity: gradient evaluation failed at probe [";
      for (int j = 0; j < x.size(); ++j) {
        msg += std::to_string(x(j));
        if (j + 1 < x.size()) msg += ", ";
      }
      throw NumericalFailure(msg + "]");
    }
    const double margin = constants.c1 * x.norm() + constants.c2 - g.norm();
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.argmin_probe = x;
    }
  }
  report.pass = report.worst_margin >= 0.0;
  return report;
}

struct DecayBandReport {
  bool pass = false;
  double worst_lower_margin = 0.0;  // min of ln f(x) - lower envelope
  double worst_upper_margin = 0.0;  // min of upper envelope - ln f(x)
  Eigen::VectorXd argmin_lower;
  Eigen::VectorXd argmin_upper;
  Eigen::VectorXd mode;
  std::int64_t probe_count = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Gradient ascent from the mean with backtracking; adequate for the
// unimodal (log-concave) densities this check is stated for.
inline Eigen::VectorXd find_mode(const DensityHandle& density) {
  Eigen::VectorXd x = density.mean;
  double fx = density.log_pdf(x);
  double step = 1.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd g = density.grad_log_pdf(x);
    if (g.norm() < 1e-12) break;
    bool moved = false;
    while (step > 1e-14) {
      const Eigen::VectorXd y = x + step * g;
      const double fy = density.log_pdf(y);
      if (fy > fx) {
        x = y;
        fx = fy;
        moved = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace detail

// Two-sided decay band for a log-concave density re-centred at its mode:
//   f(0) e^{-(c1/2)||x||^2 - c2 ||x||}  <=  f(x)  <=  e^{-a||x|| + b}.
inline DecayBandReport decay_band_check(const DensityHandle& density,
                                        const RegularityConstants& constants, double envelope_a,
                                        double envelope_b, const ProbePlan& plan) {
  if (!(envelope_a > 0.0)) throw InvalidInput("decay_band_check: envelope rate a must be > 0");
  if (plan.count < 1) throw InvalidInput("decay_band_check: probe count must be >= 1");

  const Eigen::VectorXd mode = detail::find_mode(density);
  const double log_f0 = density.log_pdf(mode);
  if (!std::isfinite(log_f0)) {
    throw InvalidInput("decay_band_check: density vanishes at its mode; "
                       "regular densities have infinite support");
  }

  const double radius = plan.max_radius > 0.0 ? plan.max_radius : detail::default_radius(density);
  const CounterRng rng{plan.seed};

  DecayBandReport report;
  report.mode = mode;
  report.probe_count = plan.count;
  report.seed = plan.seed;
  report.worst_lower_margin = std::numeric_limits<double>::infinity();
  report.worst_upper_margin = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < plan.count; ++i) {
    const Eigen::VectorXd x =
        detail::probe_point(rng, static_cast<std::uint64_t>(i), density.dimension, radius);
    const double r = x.norm();
    const double log_f = density.log_pdf(mode + x);
    const double lower = log_f0 - 0.5 * constants.c1 * r * r - constants.c2 * r;
    const double upper = -envelope_a * r + envelope_b;
    const double lower_margin = log_f - lower;
    const double upper_margin = upper - log_f;
    if (lower_margin < report.worst_lower_margin) {
      report.worst_lower_margin = lower_margin;
      report.argmin_lower = x;
    }
    if (upper_margin < report.worst_upper_margin) {
      report.worst_upper_margin = upper_margin;
      report.argmin_upper = x;
    }
  }
  report.pass = report.worst_lower_margin >= 0.0 && report.worst_upper_margin >= 0.0;
  return report;
}

struct LogConcavityReport {
  bool pass = false;
  std::int64_t violation_count = 0;
  double worst_margin = 0.0;  // min over pairs of lhs - rhs + tolerance
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double lambda = 0.0;
  std::int64_t pair_count = 0;
  std::uint64_t seed = 0;
};

// Midpoint test of log-concavity on random pairs drawn near the density's
// second-moment ellipsoid. A violating triple certifies non-log-concavity.
inline LogConcavityReport log_concavity_probe(const DensityHandle& density,
                                              std::int64_t pair_count, std::uint64_t seed) {
  if (pair_count < 1) throw InvalidInput("log_concavity_probe: pair count must be >= 1");
  constexpr double kTolerance = 1e-9;
  const CounterRng rng{seed};
  const int n = density.dimension;
  const double scale = std::sqrt(density.covariance.trace());

  LogConcavityReport report;
  report.pair_count = pair_count;
  report.seed = seed;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::int64_t p = 0; p < pair_count; ++p) {
    const std::uint64_t base = static_cast<std::uint64_t>(p) * (2 * n + 1);
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x(i) = density.mean(i) + 2.0 * scale * rng.normal(base + i);
      y(i) = density.mean(i) + 2.0 * scale * rng.normal(base + n + i);
    }
    const double lambda = rng.uniform(2 * (base + 2 * static_cast<std::uint64_t>(n)));
    const Eigen::VectorXd mid = lambda * x + (1.0 - lambda) * y;
    const double lhs = density.log_pdf(mid);
    const double rhs = lambda * density.log_pdf(x) + (1.0 - lambda) * density.log_pdf(y);
    const double margin = lhs - rhs + kTolerance;
    if (margin < 0.0) ++report.violation_count;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.x = x;
      report.y = y;
      report.lambda = lambda;
    }
  }
  report.pass = report.violation_count == 0;
  return report;
}

}  // namespace erb
