#pragma once

#include <cmath>
#include <cstdint>

#include "erb/numeric.hpp"

namespace erb {

namespace detail {

inline std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Stateless counter-keyed generator: draw #i is a pure function of
// (seed, i). Shards keyed by disjoint counter ranges can be evaluated in any
// order and still reproduce bit-identically.
struct CounterRng {
  std::uint64_t seed = 0;

  std::uint64_t bits(std::uint64_t counter) const {
    return detail::splitmix_finalize(seed + 0x9e3779b97f4a7c15ULL * (counter + 1));
  }

  // Uniform on the open interval (0, 1); endpoints are unreachable.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch). Consumes counters
  // 2i and 2i+1, so normal(i) never overlaps with normal(j) for i != j.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Fair +/-1.
  double sign(std::uint64_t counter) const {
    return (bits(counter) >> 63) ? 1.0 : -1.0;
  }
};

// Deterministic sub-stream seed for independent runs (block ladders, SE
// resampling splits). Distinct from the XOR sub-seeds used by sample_path,
// which are part of the process-model contract.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return detail::splitmix_finalize(master ^ (0xd1342543de82ef95ULL * (stream + 1)));
}

}  // namespace erb
