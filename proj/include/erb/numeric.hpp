#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace erb {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed caller input: bad parameters, mismatched grids, schema violations.
struct InvalidInput : Error {
  using Error::Error;
};

// A numerically impossible request: divergent integral, failed factorization.
struct NumericalFailure : Error {
  using Error::Error;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
// Entropy of a unit-variance Gaussian in nats: (1/2) ln(2*pi*e).
inline constexpr double kGaussEntropyNats = 1.4189385332046727417803297364056;
inline constexpr double kLn2 = 0.69314718055994530941723212145818;

// Streaming pairwise (cascade) summation. Partial sums are combined like a
// binary counter, so the rounding error grows as O(log n) and the result for
// a fixed push order is identical regardless of how the caller shards work.
class PairwiseAccumulator {
 public:
  void add(double x) {
    std::uint64_t mask = 1;
    std::size_t level = 0;
    for (; count_ & mask; mask <<= 1, ++level) {
      x += partial_[level];
      partial_[level] = 0.0;
    }
    if (level == partial_.size()) {
      partial_.push_back(0.0);
    }
    partial_[level] = x;
    ++count_;
  }

  double total() const {
    double s = 0.0;
    for (double p : partial_) s += p;
    return s;
  }

  std::uint64_t count() const { return count_; }

 private:
  std::vector<double> partial_;
  std::uint64_t count_ = 0;
};

inline double pairwise_sum(std::span<const double> xs) {
  PairwiseAccumulator acc;
  for (double x : xs) acc.add(x);
  return acc.total();
}

// Digamma via the recurrence psi(x) = psi(x+1) - 1/x and the asymptotic
// series above x = 10; absolute error below 1e-12 for x >= 1.
inline double digamma(double x) {
  if (!(x > 0.0)) {
    throw InvalidInput("digamma: argument must be positive, got " + std::to_string(x));
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return acc + std::log(x) - 0.5 * inv - series;
}

// ln of the volume of the d-dimensional unit Euclidean ball.
inline double log_unit_ball_volume(int dimension) {
  if (dimension < 1) {
    throw InvalidInput("log_unit_ball_volume: dimension must be >= 1");
  }
  const double half_d = 0.5 * static_cast<double>(dimension);
  return half_d * std::log(M_PI) - std::lgamma(half_d + 1.0);
}

inline double nats_to_bits(double nats) { return nats / kLn2; }

}  // namespace erb
