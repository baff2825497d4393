#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "erb/autocovariance.hpp"
#include "erb/numeric.hpp"
#include "erb/regularity.hpp"
#include "erb/spectral_density.hpp"
#include "erb/toeplitz.hpp"

namespace erb {

// Entropy sandwich for one process: Gaussian ceiling, KL penalty, and the
// resulting floor, in nats per coordinate. The full decomposition is kept
// because the penalty terms, not the final number, are what need diagnosis.
struct EntropyBoundReport {
  std::int64_t n = 0;  // 0 marks the asymptotic (rate) report
  double upper_nats = 0.0;
  double kl_per_n_bound = 0.0;
  double lower_nats = 0.0;
  RegularityConstants constants_used;
  double second_moment = 0.0;
};

inline double gaussian_upper_bound(const SpectralDensity& psd) { return szego_entropy_rate(psd); }

inline double gaussian_upper_bound(const AutocovarianceSpec& spec, int grid_size = 4096) {
  return szego_entropy_rate(psd_from_autocovariance(spec, grid_size));
}

inline double gaussian_upper_bound(const ToeplitzCovariance& cov) {
  return gaussian_entropy_per_coordinate(cov);
}

// Per-coordinate KL penalty for a stationary process with per-coordinate
// second moment m2 = mu^2 + sigma^2:
//   D/n <= 2 c1 m2 + 2 c2(n) sqrt(m2) / sqrt(n).
// When c2 grows as coefficient * sqrt(n) the last term loses its n
// dependence exactly: 2 * coefficient * sqrt(m2).
inline double stationary_kl_bound(const RegularityConstants& constants, double second_moment,
                                  std::int64_t n) {
  if (!(second_moment >= 0.0)) {
    throw InvalidInput("stationary_kl_bound: second moment must be >= 0");
  }
  if (n < 1) throw InvalidInput("stationary_kl_bound: n must be >= 1");
  const double first = 2.0 * constants.c1 * second_moment;
  if (constants.growth == C2Growth::sqrt_n) {
    return first + 2.0 * constants.sqrt_coefficient * std::sqrt(second_moment);
  }
  return first + 2.0 * constants.c2 * std::sqrt(second_moment) / std::sqrt(static_cast<double>(n));
}

// Same penalty with the stationary moment replaced by the maximum
// per-coordinate second moment; covers non-stationary sequences with
// uniformly bounded moments.
inline double bounded_moment_kl_bound(const RegularityConstants& constants,
                                      double max_second_moment, std::int64_t n) {
  return stationary_kl_bound(constants, max_second_moment, n);
}

// Asymptotic lower bound on the entropy rate: Gaussian rate minus the
// n -> infinity limit of the KL penalty (the c2 term survives only under
// sqrt_n growth).
inline EntropyBoundReport lower_bound_rate(const SpectralDensity& psd,
                                           const RegularityConstants& constants, double mean,
                                           double variance) {
  if (!(variance > 0.0)) throw InvalidInput("lower_bound_rate: variance must be > 0");
  const double m2 = mean * mean + variance;
  EntropyBoundReport report;
  report.n = 0;
  report.upper_nats = szego_entropy_rate(psd);
  report.kl_per_n_bound = 2.0 * constants.c1 * m2;
  if (constants.growth == C2Growth::sqrt_n) {
    report.kl_per_n_bound += 2.0 * constants.sqrt_coefficient * std::sqrt(m2);
  }
  report.lower_nats = report.upper_nats - report.kl_per_n_bound;
  report.constants_used = constants;
  report.second_moment = m2;
  return report;
}

inline EntropyBoundReport lower_bound_rate(const AutocovarianceSpec& spec,
                                           const RegularityConstants& constants, double mean,
                                           double variance, int grid_size = 4096) {
  return lower_bound_rate(psd_from_autocovariance(spec, grid_size), constants, mean, variance);
}

// Explicit rate bound for the product-plus-noise model, assembled from the
// convolved spectrum and the smoothing constants:
//   (1/2) int ln(2 pi e ((S_H * S_X)(f) + v)) df
//     - 6 (r_H(0) r_X(0)/v + 1)
//     - (8/v) sqrt(r_H(0) r_X(0)) sqrt(r_H(0) r_X(0) + v).
inline EntropyBoundReport product_noise_rate_bound(double r_h0, double r_x0,
                                                   double noise_variance,
                                                   const SpectralDensity& s_h,
                                                   const SpectralDensity& s_x) {
  if (!(noise_variance > 0.0)) {
    throw InvalidInput("product_noise_rate_bound: noise variance must be > 0");
  }
  const double tol = 1e-8;
  if (std::abs(s_h.mean() - r_h0) > tol * std::max(1.0, std::abs(r_h0))) {
    throw InvalidInput("product_noise_rate_bound: s_h mean " + std::to_string(s_h.mean()) +
                       " is inconsistent with r_h0 " + std::to_string(r_h0));
  }
  if (std::abs(s_x.mean() - r_x0) > tol * std::max(1.0, std::abs(r_x0))) {
    throw InvalidInput("product_noise_rate_bound: s_x mean " + std::to_string(s_x.mean()) +
                       " is inconsistent with r_x0 " + std::to_string(r_x0));
  }

  const SpectralDensity s_y = add_constant(convolve_psd(s_h, s_x), noise_variance);
  const double power = r_h0 * r_x0;
  EntropyBoundReport report;
  report.n = 0;
  report.upper_nats = szego_entropy_rate(s_y);
  report.kl_per_n_bound = 6.0 * (power / noise_variance + 1.0) +
                          8.0 / noise_variance * std::sqrt(power) *
                              std::sqrt(power + noise_variance);
  report.lower_nats = report.upper_nats - report.kl_per_n_bound;
  report.constants_used = product_smoothing_constants(noise_variance, r_h0, r_x0, 1);
  report.second_moment = power + noise_variance;
  return report;
}

// Coupling bound on the entropy difference of two laws with the stated
// second moments, given regularity constants and their W2 distance:
//   delta = ((c1/2) sqrt(E||U||^2) + (c1/2) sqrt(E||V||^2) + c2) * W2.
inline double entropy_difference_bound(double c1, double c2, double second_moment_u,
                                       double second_moment_v, double w2) {
  if (!(c1 > 0.0) || !(c2 >= 0.0)) {
    throw InvalidInput("entropy_difference_bound: need c1 > 0 and c2 >= 0");
  }
  if (!(second_moment_u >= 0.0) || !(second_moment_v >= 0.0) || !(w2 >= 0.0)) {
    throw InvalidInput("entropy_difference_bound: moments and w2 must be >= 0");
  }
  return (0.5 * c1 * std::sqrt(second_moment_u) + 0.5 * c1 * std::sqrt(second_moment_v) + c2) * w2;
}

}  // namespace erb
