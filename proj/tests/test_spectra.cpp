#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "erb/autocovariance.hpp"
#include "erb/rng.hpp"
#include "erb/spectral_density.hpp"
#include "oracles.hpp"

using namespace erb;

TEST_CASE("autocovariance closed forms") {
  const auto white = AutocovarianceSpec::white(2.0);
  REQUIRE(white(0) == 2.0);
  REQUIRE(white(3) == 0.0);

  const auto ar = AutocovarianceSpec::ar1(1.0, 0.5);
  REQUIRE(ar(0) == 1.0);
  REQUIRE(ar(1) == 0.5);
  REQUIRE(ar(-2) == Catch::Approx(0.25));

  // ma([1, 0.5], 1): r(0) = 1.25, r(1) = 0.5, r(2) = 0
  const auto ma = AutocovarianceSpec::ma({1.0, 0.5}, 1.0);
  REQUIRE(ma(0) == Catch::Approx(1.25));
  REQUIRE(ma(1) == Catch::Approx(0.5));
  REQUIRE(ma(2) == 0.0);

  const auto tab = AutocovarianceSpec::tabulated({1.0, 0.9});
  REQUIRE(tab(1) == 0.9);
  REQUIRE(tab(-1) == 0.9);
  REQUIRE(tab(2) == 0.0);
}

TEST_CASE("autocovariance symmetry and bound properties") {
  const CounterRng rng{31};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> taps;
    const int q = 1 + static_cast<int>(3 * rng.uniform(10 * trial));
    for (int i = 0; i <= q; ++i) taps.push_back(2.0 * rng.uniform(100 * trial + i) - 1.0);
    const auto spec = AutocovarianceSpec::ma(taps, 1.0 + rng.uniform(1000 + trial));
    for (int l = 0; l <= q + 2; ++l) {
      REQUIRE(spec(l) == spec(-l));
      REQUIRE(std::abs(spec(l)) <= spec(0) + 1e-12);
    }
  }
}

TEST_CASE("autocovariance input validation") {
  REQUIRE_THROWS_AS(AutocovarianceSpec::ar1(1.0, 1.0), InvalidInput);
  REQUIRE_THROWS_AS(AutocovarianceSpec::ar1(1.0, -1.5), InvalidInput);
  REQUIRE_THROWS_AS(AutocovarianceSpec::white(-1.0), InvalidInput);
  REQUIRE_THROWS_AS(AutocovarianceSpec::ma({}, 1.0), InvalidInput);
  REQUIRE_THROWS_AS(AutocovarianceSpec::tabulated({1.0, 2.0}), InvalidInput);  // |r(1)| > r(0)
  const double inf = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(AutocovarianceSpec::tabulated({1.0, inf}), InvalidInput);
}

TEST_CASE("white spectrum is flat") {
  const auto s = psd_from_autocovariance(AutocovarianceSpec::white(2.0), 64);
  REQUIRE(s.grid_size == 64);
  for (double v : s.values) REQUIRE(v == Catch::Approx(2.0).margin(1e-14));
  REQUIRE(s.negative_clamp_count == 0);
}

TEST_CASE("ar1 spectrum matches the closed form on the whole grid") {
  const auto s = psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.5), 256);
  for (int i = 0; i < s.grid_size; ++i) {
    REQUIRE(s.values[i] ==
            Catch::Approx(oracle::ar1_psd(1.0, 0.5, s.frequency(i))).margin(1e-9));
  }
  // S(0) = (1 - 0.25) / (1 - 0.5)^2 = 3 at the f = 0 grid point
  REQUIRE(s.values[128] == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("ma spectrum is the hand-expanded two-lag cosine sum") {
  const auto s = psd_from_autocovariance(AutocovarianceSpec::ma({1.0, 0.5}, 1.0), 8);
  for (int i = 0; i < 8; ++i) {
    REQUIRE(s.values[i] ==
            Catch::Approx(1.25 + std::cos(kTwoPi * s.frequency(i))).margin(1e-12));
  }
}

TEST_CASE("parseval: grid mean equals r(0) for all four kinds") {
  const auto specs = {
      AutocovarianceSpec::white(2.0),
      AutocovarianceSpec::ar1(2.5, -0.7),
      AutocovarianceSpec::ma({1.0, 0.5, -0.25}, 0.7),
      AutocovarianceSpec::tabulated({1.0, 0.4, 0.2}),
  };
  for (const auto& spec : specs) {
    const auto s = psd_from_autocovariance(spec, 512);
    REQUIRE(s.mean() == Catch::Approx(spec(0)).epsilon(1e-8));
  }
}

TEST_CASE("constructed spectra are symmetric: value[i] == value[(M-i) mod M]") {
  const auto s = psd_from_autocovariance(AutocovarianceSpec::ar1(1.3, 0.6), 128);
  for (int i = 0; i < s.grid_size; ++i) {
    REQUIRE(s.values[i] == Catch::Approx(s.values[(s.grid_size - i) % s.grid_size]).margin(1e-10));
  }
}

TEST_CASE("negative truncation round-off is clamped and counted") {
  // [1, 0.9] is not a valid spectrum-producing sequence: S(1/2) = 1 - 1.8 < 0.
  const auto s = psd_from_autocovariance(AutocovarianceSpec::tabulated({1.0, 0.9}), 32);
  REQUIRE(s.negative_clamp_count > 0);
  for (double v : s.values) REQUIRE(v >= 0.0);
}

TEST_CASE("aliasing guard rejects grids below twice the cutoff") {
  const auto spec = AutocovarianceSpec::ma({1.0, 0.5, 0.25, 0.125, 0.0625}, 1.0);
  REQUIRE_THROWS_AS(psd_from_autocovariance(spec, 6), InvalidInput);
  REQUIRE_NOTHROW(psd_from_autocovariance(spec, 8));
}

TEST_CASE("flat spectra convolve to flat") {
  const auto one = flat_spectrum(1.0, 16);
  const auto c = convolve_psd(one, one);
  for (double v : c.values) REQUIRE(v == Catch::Approx(1.0).margin(1e-12));

  const auto a = psd_from_autocovariance(AutocovarianceSpec::white(2.0), 16);
  const auto b = psd_from_autocovariance(AutocovarianceSpec::white(3.0), 16);
  for (double v : convolve_psd(a, b).values) REQUIRE(v == Catch::Approx(6.0).margin(1e-12));
}

TEST_CASE("convolution of ar1 spectra equals the product-autocovariance spectrum") {
  const int m = 256;
  const auto s_h = psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.5), m);
  const auto conv = convolve_psd(s_h, s_h);
  // r_H(l) r_X(l) = 0.25^|l|, i.e. ar1(1, 0.25), checked both ways
  const auto direct = psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.25), m);
  REQUIRE(conv.mean() == Catch::Approx(1.0).epsilon(1e-10));
  for (int i = 0; i < m; ++i) {
    REQUIRE(conv.values[i] == Catch::Approx(direct.values[i]).margin(1e-8));
  }
}

TEST_CASE("convolution preserves mean, commutes, and is bilinear") {
  const auto a = psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.5), 128);
  const auto b = psd_from_autocovariance(AutocovarianceSpec::ma({1.0, -0.4}, 2.0), 128);
  const auto ab = convolve_psd(a, b);
  const auto ba = convolve_psd(b, a);
  REQUIRE(ab.mean() == Catch::Approx(a.mean() * b.mean()).epsilon(1e-10));
  for (int i = 0; i < 128; ++i) REQUIRE(ab.values[i] == ba.values[i]);

  auto a_scaled = a;
  for (double& v : a_scaled.values) v *= 3.0;
  const auto scaled = convolve_psd(a_scaled, b);
  for (int i = 0; i < 128; ++i) {
    REQUIRE(scaled.values[i] == Catch::Approx(3.0 * ab.values[i]).epsilon(1e-12));
  }

  REQUIRE_THROWS_AS(convolve_psd(a, flat_spectrum(1.0, 32)), InvalidInput);
}

TEST_CASE("szego entropy rate: flat spectra") {
  REQUIRE(szego_entropy_rate(flat_spectrum(1.0, 64)) ==
          Catch::Approx(kGaussEntropyNats).margin(1e-12));
  // scaling by 4 adds (1/2) ln 4 = ln 2
  REQUIRE(szego_entropy_rate(flat_spectrum(4.0, 64)) ==
          Catch::Approx(kGaussEntropyNats + kLn2).margin(1e-12));
}

TEST_CASE("szego entropy rate: ar1 matches the innovation-variance closed form") {
  const auto s = psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.5), 4096);
  REQUIRE(szego_entropy_rate(s) == Catch::Approx(oracle::ar1_entropy_rate(1.0, 0.5)).margin(1e-8));
}

TEST_CASE("szego entropy rate rejects zero bins with a bin diagnostic") {
  auto s = flat_spectrum(1.0, 8);
  s.values[3] = 0.0;
  try {
    szego_entropy_rate(s);
    FAIL("expected divergence error");
  } catch (const NumericalFailure& e) {
    REQUIRE(std::string(e.what()).find("bin 3") != std::string::npos);
  }
}

TEST_CASE("szego entropy rate is monotone in the spectrum") {
  const CounterRng rng{99};
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> lo(32), hi(32);
    for (int i = 0; i < 32; ++i) {
      lo[i] = 0.1 + rng.uniform(100 * trial + i);
      hi[i] = lo[i] + rng.uniform(10000 + 100 * trial + i);
    }
    REQUIRE(szego_entropy_rate(make_spectral_density(hi)) >=
            szego_entropy_rate(make_spectral_density(lo)));
  }
}

TEST_CASE("psd extrema") {
  const auto flat = psd_extrema(flat_spectrum(2.0, 16));
  REQUIRE(flat.min == 2.0);
  REQUIRE(flat.max == 2.0);

  const auto ar = psd_extrema(psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.5), 256));
  REQUIRE(ar.min == Catch::Approx(1.0 / 3.0).margin(1e-6));
  REQUIRE(ar.max == Catch::Approx(3.0).margin(1e-6));

  const auto ma = psd_extrema(psd_from_autocovariance(AutocovarianceSpec::ma({1.0, 0.5}, 1.0), 64));
  REQUIRE(ma.min == Catch::Approx(0.25).margin(1e-9));
  REQUIRE(ma.max == Catch::Approx(2.25).margin(1e-9));
}

TEST_CASE("spectral density CSV export") {
  std::ostringstream os;
  write_csv(flat_spectrum(1.5, 4), os);
  REQUIRE(os.str() == "frequency,value\n-0.5,1.5\n-0.25,1.5\n0,1.5\n0.25,1.5\n");
}
