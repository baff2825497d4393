#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "erb/autocovariance.hpp"
#include "erb/density.hpp"
#include "erb/numeric.hpp"
#include "erb/regularity.hpp"
#include "erb/rng.hpp"
#include "erb/sample_matrix.hpp"
#include "erb/spectral_density.hpp"
#include "erb/toeplitz.hpp"

namespace erb {

enum class ProcessKind {
  gaussian,           // stationary Gaussian with a given autocovariance
  product_noise,      // H .* X + Z, H and X independent stationary Gaussians
  product_two_point,  // H .* X + Z with X i.i.d. +/-1 signs
};

inline const char* to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::gaussian: return "gaussian";
    case ProcessKind::product_noise: return "product_noise";
    case ProcessKind::product_two_point: return "product_two_point";
  }
  return "?";
}

// A samplable stationary process with a deterministic seed contract.
struct ProcessModel {
  ProcessKind kind = ProcessKind::gaussian;
  AutocovarianceSpec spec_h;
  std::optional<AutocovarianceSpec> spec_x;  // product_noise only
  double mean = 0.0;                         // gaussian only
  double noise_variance = 0.0;               // product models

  static ProcessModel gaussian(AutocovarianceSpec spec, double mean = 0.0) {
    ProcessModel m{ProcessKind::gaussian, std::move(spec), std::nullopt, mean, 0.0};
    return m;
  }

  // noise_variance = 0 is allowed for sampling and spectra; the smoothing
  // constants and the closed-form density require strictly positive noise.
  static ProcessModel product_noise(AutocovarianceSpec h, AutocovarianceSpec x,
                                    double noise_variance) {
    if (!(noise_variance >= 0.0)) {
      throw InvalidInput("product_noise: noise variance must be >= 0");
    }
    ProcessModel m{ProcessKind::product_noise, std::move(h), std::move(x), 0.0, noise_variance};
    return m;
  }

  static ProcessModel product_two_point(AutocovarianceSpec h, double noise_variance) {
    if (!(noise_variance >= 0.0)) {
      throw InvalidInput("product_two_point: noise variance must be >= 0");
    }
    ProcessModel m{ProcessKind::product_two_point, std::move(h), std::nullopt, 0.0,
                   noise_variance};
    return m;
  }

  // variance of a single coordinate of the process
  double coordinate_variance() const {
    switch (kind) {
      case ProcessKind::gaussian:
        return spec_h(0);
      case ProcessKind::product_noise:
        return spec_h(0) * (*spec_x)(0) + noise_variance;
      case ProcessKind::product_two_point:
        return spec_h(0) + noise_variance;  // sign process has unit variance
    }
    return 0.0;
  }

  double coordinate_mean() const { return kind == ProcessKind::gaussian ? mean : 0.0; }

  std::string describe() const {
    switch (kind) {
      case ProcessKind::gaussian:
        return "gaussian(" + spec_h.describe() + ")";
      case ProcessKind::product_noise:
        return "product_noise(" + spec_h.describe() + ", " + spec_x->describe() +
               ", noise=" + std::to_string(noise_variance) + ")";
      case ProcessKind::product_two_point:
        return "product_two_point(" + spec_h.describe() +
               ", noise=" + std::to_string(noise_variance) + ")";
    }
    return "?";
  }
};

// `count` independent length-n blocks. Component streams use the fixed XOR
// sub-seeds (seed^1 for H, seed^2 for X, seed^3 for Z), so a block is a pure
// function of (model, n, count, seed).
inline SampleMatrix sample_path(const ProcessModel& model, int n, std::int64_t count,
                                std::uint64_t seed) {
  if (n < 1) throw InvalidInput("sample_path: n must be >= 1");
  if (count < 0) throw InvalidInput("sample_path: count must be >= 0");

  SampleMatrix out;
  out.seed = seed;
  out.provenance = model.describe() + ", n=" + std::to_string(n);

  switch (model.kind) {
    case ProcessKind::gaussian: {
      out = cholesky_sampler(build_covariance(model.spec_h, n), count, seed);
      if (model.mean != 0.0) out.values.array() += model.mean;
      break;
    }
    case ProcessKind::product_noise: {
      const auto h = cholesky_sampler(build_covariance(model.spec_h, n), count, seed ^ 1ULL);
      const auto x = cholesky_sampler(build_covariance(*model.spec_x, n), count, seed ^ 2ULL);
      const CounterRng noise_rng{seed ^ 3ULL};
      out.values.resize(count, n);
      const double noise_sd = std::sqrt(model.noise_variance);
      for (std::int64_t c = 0; c < count; ++c) {
        const std::uint64_t base = static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(n);
        for (int j = 0; j < n; ++j) {
          out.values(c, j) = h.values(c, j) * x.values(c, j) +
                             noise_sd * noise_rng.normal(base + static_cast<std::uint64_t>(j));
        }
      }
      break;
    }
    case ProcessKind::product_two_point: {
      const auto h = cholesky_sampler(build_covariance(model.spec_h, n), count, seed ^ 1ULL);
      const CounterRng sign_rng{seed ^ 2ULL};
      const CounterRng noise_rng{seed ^ 3ULL};
      out.values.resize(count, n);
      const double noise_sd = std::sqrt(model.noise_variance);
      for (std::int64_t c = 0; c < count; ++c) {
        const std::uint64_t base = static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(n);
        for (int j = 0; j < n; ++j) {
          const std::uint64_t ctr = base + static_cast<std::uint64_t>(j);
          out.values(c, j) =
              h.values(c, j) * sign_rng.sign(ctr) + noise_sd * noise_rng.normal(ctr);
        }
      }
      break;
    }
  }
  out.seed = seed;
  out.provenance = model.describe() + ", n=" + std::to_string(n);
  return out;
}

// Spectrum of the model: component spectrum for a Gaussian process, and the
// spectral convolution plus the flat noise floor for the product models.
inline SpectralDensity model_psd(const ProcessModel& model, int grid_size = 4096) {
  switch (model.kind) {
    case ProcessKind::gaussian:
      return psd_from_autocovariance(model.spec_h, grid_size);
    case ProcessKind::product_noise: {
      const auto s_h = psd_from_autocovariance(model.spec_h, grid_size);
      const auto s_x = psd_from_autocovariance(*model.spec_x, grid_size);
      return add_constant(convolve_psd(s_h, s_x), model.noise_variance);
    }
    case ProcessKind::product_two_point: {
      const auto s_h = psd_from_autocovariance(model.spec_h, grid_size);
      const auto s_x = flat_spectrum(1.0, grid_size);
      return add_constant(convolve_psd(s_h, s_x), model.noise_variance);
    }
  }
  throw InvalidInput("model_psd: unknown model kind");
}

// Covariance of a length-n block: r_Y(l) = r_H(l) r_X(l) + noise * delta(l)
// for the product models (the sign process contributes delta(l)).
inline ToeplitzCovariance model_covariance(const ProcessModel& model, int n) {
  if (n < 1) throw InvalidInput("model_covariance: n must be >= 1");
  std::vector<double> row(static_cast<std::size_t>(n));
  switch (model.kind) {
    case ProcessKind::gaussian:
      return build_covariance(model.spec_h, n);
    case ProcessKind::product_noise:
      for (int l = 0; l < n; ++l) row[static_cast<std::size_t>(l)] = model.spec_h(l) * (*model.spec_x)(l);
      row[0] += model.noise_variance;
      return ToeplitzCovariance{std::move(row)};
    case ProcessKind::product_two_point:
      row[0] = model.spec_h(0) + model.noise_variance;
      return ToeplitzCovariance{std::move(row)};
  }
  throw InvalidInput("model_covariance: unknown model kind");
}

// Exact block density for the tractable sign-product family: a 2^n-component
// Gaussian mixture over sign patterns s, components N(0, D_s R_H D_s + v I).
// Only this family admits a closed form, and only at small n.
inline DensityHandle model_density(const ProcessModel& model, int n) {
  if (model.kind != ProcessKind::product_two_point) {
    throw InvalidInput(
        "model_density: closed-form densities exist only for the product_two_point family");
  }
  if (n < 1 || n > 8) {
    throw InvalidInput("model_density: n must be in [1, 8]; the mixture has 2^n components");
  }
  const Eigen::MatrixXd r_h = build_covariance(model.spec_h, n).dense();
  const std::size_t combos = static_cast<std::size_t>(1) << n;
  std::vector<double> weights(combos, 1.0 / static_cast<double>(combos));
  std::vector<Eigen::VectorXd> means(combos, Eigen::VectorXd::Zero(n));
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(combos);
  for (std::size_t mask = 0; mask < combos; ++mask) {
    Eigen::VectorXd signs(n);
    for (int j = 0; j < n; ++j) signs(j) = (mask >> j) & 1 ? -1.0 : 1.0;
    Eigen::MatrixXd cov = signs.asDiagonal() * r_h * signs.asDiagonal();
    cov.diagonal().array() += model.noise_variance;
    covs.push_back(std::move(cov));
  }
  return make_gaussian_mixture(std::move(weights), std::move(means), std::move(covs));
}

// Certified constants for the model. Gaussian processes use the n-uniform
// spectral floor; the noise-smoothed product models use the smoothing bound
// with E||B||^2 = n r_H(0) r_X(0).
inline RegularityConstants model_regularity(const ProcessModel& model, std::int64_t n,
                                            int grid_size = 4096) {
  switch (model.kind) {
    case ProcessKind::gaussian:
      return gaussian_regularity_process(model.spec_h, grid_size);
    case ProcessKind::product_noise:
      return product_smoothing_constants(model.noise_variance, model.spec_h(0), (*model.spec_x)(0),
                                         n);
    case ProcessKind::product_two_point:
      return product_smoothing_constants(model.noise_variance, model.spec_h(0), 1.0, n);
  }
  throw InvalidInput("model_regularity: unknown model kind");
}

}  // namespace erb
