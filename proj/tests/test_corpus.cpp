#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "erb/corpus.hpp"
#include "erb/estimators.hpp"

using namespace erb;

TEST_CASE("corpus enumerates the expected entries") {
  const auto densities = built_in_densities();
  REQUIRE(densities.size() >= 7);
  REQUIRE_NOTHROW(find_density(densities, "logistic"));
  REQUIRE_NOTHROW(find_density(densities, "standard_gaussian"));
  REQUIRE_NOTHROW(find_density(densities, "smoothed_two_point"));
  REQUIRE_THROWS_AS(find_density(densities, "no_such_density"), InvalidInput);

  const auto& logistic = find_density(densities, "logistic");
  REQUIRE(logistic.constants->c1 == Catch::Approx(0.01));
  REQUIRE(logistic.constants->c2 == Catch::Approx(1.0));

  const auto processes = built_in_processes();
  bool found_ar1 = false;
  for (const auto& p : processes) {
    if (p.name == "gaussian_ar1") {
      found_ar1 = true;
      REQUIRE(p.constants.c1 == Catch::Approx(3.0).margin(1e-6));
    }
  }
  REQUIRE(found_ar1);
}

TEST_CASE("every certified corpus density passes its own constants") {
  for (const auto& entry : built_in_densities()) {
    if (!entry.constants) continue;
    const auto report = verify_regularity(entry.density, *entry.constants, ProbePlan{4000, 0.0, 97});
    INFO(entry.name);
    REQUIRE(report.pass);
    REQUIRE(report.worst_margin >= 0.0);
  }
}

TEST_CASE("log-concavity classification matches the probe verdict") {
  for (const auto& entry : built_in_densities()) {
    INFO(entry.name);
    const auto report = log_concavity_probe(entry.density, 20000, 11);
    if (entry.log_concave) {
      REQUIRE(report.pass);
    } else {
      REQUIRE_FALSE(report.pass);
    }
  }
}

TEST_CASE("corpus samplers draw from the advertised densities") {
  // first two moments within 5 standard errors, for every corpus entry
  for (const auto& entry : built_in_densities()) {
    INFO(entry.name);
    const std::int64_t count = 50000;
    const auto samples = entry.sampler(count, 1234);
    REQUIRE(samples.count() == count);
    REQUIRE(samples.dimension() == entry.density.dimension);
    for (int c = 0; c < samples.dimension(); ++c) {
      const double mean = samples.values.col(c).mean();
      const double var =
          samples.values.col(c).squaredNorm() / count - mean * mean;
      const double expected_var = entry.density.covariance(c, c);
      const double mean_se = std::sqrt(expected_var / count);
      REQUIRE(std::abs(mean - entry.density.mean(c)) < 5.0 * mean_se);
      // conservative: gaussian-like SE for the variance, inflated 2x
      const double var_se = 2.0 * expected_var * std::sqrt(2.0 / count);
      REQUIRE(std::abs(var - expected_var) < 5.0 * var_se);
    }
  }
}

TEST_CASE("corpus samplers agree with the density in KL") {
  // MC KL of the sampler's draws against its own density must sit at zero:
  // D(f||f) = 0 exactly, so ln f - ln f vanishes termwise. Against the
  // matched gaussian it must be nonnegative within noise.
  for (const auto& entry : built_in_densities()) {
    if (entry.density.dimension > 2) continue;
    INFO(entry.name);
    const auto samples = entry.sampler(20000, 777);
    const auto self = kl_monte_carlo(entry.density, entry.density, samples);
    REQUIRE(self.value == 0.0);
    const auto vs_gauss = kl_monte_carlo(entry.density, matched_gaussian(entry.density), samples);
    REQUIRE(vs_gauss.value > -3.0 * vs_gauss.std_error - 1e-12);
  }
}
