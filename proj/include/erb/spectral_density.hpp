#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "erb/autocovariance.hpp"
#include "erb/numeric.hpp"

namespace erb {

// Power spectral density sampled on the uniform grid f_i = -1/2 + i/M,
// i = 0..M-1, M even. Units: signal variance per unit frequency.
struct SpectralDensity {
  int grid_size = 0;
  std::vector<double> values;
  // Bins where truncation round-off produced a tiny negative value that was
  // clamped to zero. Nonzero counts flag a spec whose stored lags are not a
  // valid autocovariance sequence.
  int negative_clamp_count = 0;

  double frequency(int i) const {
    return -0.5 + static_cast<double>(i) / static_cast<double>(grid_size);
  }

  double mean() const {
    PairwiseAccumulator acc;
    for (double v : values) acc.add(v);
    return acc.total() / static_cast<double>(grid_size);
  }
};

inline void validate_grid_size(int grid_size) {
  if (grid_size < 2 || grid_size % 2 != 0) {
    throw InvalidInput("spectral grid size must be a positive even integer, got " +
                       std::to_string(grid_size));
  }
}

inline SpectralDensity make_spectral_density(std::vector<double> values) {
  validate_grid_size(static_cast<int>(values.size()));
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInput("spectral density values must be finite and >= 0");
    }
  }
  SpectralDensity s;
  s.grid_size = static_cast<int>(values.size());
  s.values = std::move(values);
  return s;
}

inline SpectralDensity flat_spectrum(double level, int grid_size) {
  validate_grid_size(grid_size);
  if (!(level >= 0.0)) throw InvalidInput("flat_spectrum: level must be >= 0");
  SpectralDensity s;
  s.grid_size = grid_size;
  s.values.assign(static_cast<std::size_t>(grid_size), level);
  return s;
}

// S(f_i) = sum_{|m| <= L} r(m) e^{-j 2 pi m f_i}, evaluated as the real
// cosine sum r(0) + 2 sum_m r(m) cos(2 pi m f_i). Tiny negatives from
// truncation are clamped to zero and counted.
inline SpectralDensity psd_from_autocovariance(const AutocovarianceSpec& spec, int grid_size,
                                               int lag_cutoff) {
  validate_grid_size(grid_size);
  if (lag_cutoff < 0) throw InvalidInput("lag_cutoff must be >= 0");
  if (grid_size < 2 * lag_cutoff) {
    throw InvalidInput("grid_size " + std::to_string(grid_size) +
                       " is below twice the lag cutoff " + std::to_string(lag_cutoff) +
                       "; the sampled spectrum would alias");
  }

  std::vector<double> lags(static_cast<std::size_t>(lag_cutoff) + 1);
  for (int m = 0; m <= lag_cutoff; ++m) lags[static_cast<std::size_t>(m)] = spec(m);

  SpectralDensity s;
  s.grid_size = grid_size;
  s.values.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    const double f = -0.5 + static_cast<double>(i) / grid_size;
    PairwiseAccumulator acc;
    acc.add(lags[0]);
    for (int m = 1; m <= lag_cutoff; ++m) {
      acc.add(2.0 * lags[static_cast<std::size_t>(m)] * std::cos(kTwoPi * m * f));
    }
    double v = acc.total();
    if (v < 0.0) {
      v = 0.0;
      ++s.negative_clamp_count;
    }
    s.values[static_cast<std::size_t>(i)] = v;
  }
  return s;
}

inline SpectralDensity psd_from_autocovariance(const AutocovarianceSpec& spec,
                                               int grid_size = 4096) {
  return psd_from_autocovariance(spec, grid_size, spec.default_lag_cutoff());
}

// Circular convolution of two sampled spectra on the periodic frequency
// interval, step 1/M. Grid index 0 sits at f = -1/2, so the f = 0 origin is
// at index M/2; the index arithmetic below folds that offset in. Preserves
// total power: mean(out) = mean(a) * mean(b).
inline SpectralDensity convolve_psd(const SpectralDensity& a, const SpectralDensity& b) {
  if (a.grid_size != b.grid_size) {
    throw InvalidInput("convolve_psd: grids differ (" + std::to_string(a.grid_size) + " vs " +
                       std::to_string(b.grid_size) + ")");
  }
  const int m = a.grid_size;
  SpectralDensity out;
  out.grid_size = m;
  out.values.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    // For bin i the indices pair up through the involution
    // j(k) = (i + M/2 - k) mod M. Summing each unordered pair as one term
    // makes the result bitwise symmetric in (a, b).
    PairwiseAccumulator acc;
    for (int k = 0; k < m; ++k) {
      const int j = ((i - k + m / 2) % m + m) % m;
      if (k < j) {
        acc.add(a.values[static_cast<std::size_t>(k)] * b.values[static_cast<std::size_t>(j)] +
                a.values[static_cast<std::size_t>(j)] * b.values[static_cast<std::size_t>(k)]);
      } else if (k == j) {
        acc.add(a.values[static_cast<std::size_t>(k)] * b.values[static_cast<std::size_t>(k)]);
      }
    }
    out.values[static_cast<std::size_t>(i)] = acc.total() / static_cast<double>(m);
  }
  return out;
}

inline SpectralDensity add_constant(SpectralDensity s, double level) {
  if (!(level >= 0.0)) throw InvalidInput("add_constant: level must be >= 0");
  for (double& v : s.values) v += level;
  return s;
}

// Midpoint evaluation of (1/2) integral of ln(2 pi e S(f)) df over one
// period: the Gaussian entropy rate for this spectrum, in nats/coordinate.
inline double szego_entropy_rate(const SpectralDensity& s) {
  validate_grid_size(s.grid_size);
  PairwiseAccumulator acc;
  for (int i = 0; i < s.grid_size; ++i) {
    const double v = s.values[static_cast<std::size_t>(i)];
    if (!(v > 0.0)) {
      throw NumericalFailure("szego_entropy_rate: spectrum is zero in bin " + std::to_string(i) +
                             " (f = " + std::to_string(s.frequency(i)) +
                             "); the entropy-rate integral diverges to -infinity");
    }
    acc.add(std::log(v));
  }
  return kGaussEntropyNats + 0.5 * acc.total() / static_cast<double>(s.grid_size);
}

struct SpectrumExtrema {
  double min = 0.0;
  double max = 0.0;
};

// Grid extrema; the Szego bracket for Toeplitz eigenvalues.
inline SpectrumExtrema psd_extrema(const SpectralDensity& s) {
  validate_grid_size(s.grid_size);
  SpectrumExtrema e{s.values[0], s.values[0]};
  for (double v : s.values) {
    if (v < e.min) e.min = v;
    if (v > e.max) e.max = v;
  }
  return e;
}

// Two-column CSV (frequency, value).
inline void write_csv(const SpectralDensity& s, std::ostream& os) {
  os << "frequency,value\n";
  char buf[64];
  for (int i = 0; i < s.grid_size; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", s.frequency(i),
                  s.values[static_cast<std::size_t>(i)]);
    os << buf;
  }
}

}  // namespace erb
