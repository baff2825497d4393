#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "erb/estimators.hpp"
#include "erb/simulate.hpp"

using namespace erb;

TEST_CASE("gaussian white model: unit sample variance") {
  const auto model = ProcessModel::gaussian(AutocovarianceSpec::white(1.0));
  const auto draws = sample_path(model, 1, 100000, 7);
  const double mean = draws.values.col(0).mean();
  const double var = draws.values.col(0).squaredNorm() / draws.count() - mean * mean;
  REQUIRE(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / draws.count()));
}

TEST_CASE("product model: per-coordinate variance r_H(0) r_X(0) + noise") {
  const auto model = ProcessModel::product_noise(AutocovarianceSpec::white(1.0),
                                                 AutocovarianceSpec::white(1.0), 1.0);
  REQUIRE(model.coordinate_variance() == Catch::Approx(2.0));
  const auto draws = sample_path(model, 1, 100000, 11);
  const double var = draws.values.col(0).squaredNorm() / draws.count();
  // Y = H X + Z has kurtotic tails; estimate the moment SE from the samples
  const double m4 = draws.values.col(0).array().pow(4).mean();
  const double se = std::sqrt((m4 - var * var) / draws.count());
  REQUIRE(std::abs(var - 2.0) < 3.0 * se);
}

TEST_CASE("product model: lag-1 covariance is the product of lag-1 covariances") {
  const auto model = ProcessModel::product_noise(AutocovarianceSpec::ar1(1.0, 0.5),
                                                 AutocovarianceSpec::ar1(1.0, 0.5), 1.0);
  const auto draws = sample_path(model, 2, 100000, 13);
  const Eigen::ArrayXd products = draws.values.col(0).array() * draws.values.col(1).array();
  const double lag1 = products.mean();
  const double se = std::sqrt((products.square().mean() - lag1 * lag1) / draws.count());
  REQUIRE(std::abs(lag1 - 0.25) < 3.0 * se);
}

TEST_CASE("empirical block covariance matches the model covariance entrywise") {
  const auto model = ProcessModel::product_noise(AutocovarianceSpec::ar1(1.0, 0.6),
                                                 AutocovarianceSpec::ar1(1.0, -0.4), 0.5);
  const int n = 4;
  const auto draws = sample_path(model, n, 100000, 17);
  const Eigen::MatrixXd expected = model_covariance(model, n).dense();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::ArrayXd prod = draws.values.col(i).array() * draws.values.col(j).array();
      const double est = prod.mean();
      const double se = std::sqrt((prod.square().mean() - est * est) / draws.count());
      REQUIRE(std::abs(est - expected(i, j)) < 5.0 * se);
    }
  }
}

TEST_CASE("sample paths are bitwise reproducible in (model, n, count, seed)") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 0.5);
  const auto a = sample_path(model, 4, 64, 21);
  const auto b = sample_path(model, 4, 64, 21);
  const auto c = sample_path(model, 4, 64, 22);
  REQUIRE(a.values == b.values);
  REQUIRE(a.values != c.values);
}

TEST_CASE("model psd: flat components plus noise floor") {
  const auto model = ProcessModel::product_noise(AutocovarianceSpec::white(1.0),
                                                 AutocovarianceSpec::white(1.0), 1.0);
  const auto psd = model_psd(model, 64);
  for (double v : psd.values) REQUIRE(v == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("model psd: convolving with a flat spectrum averages") {
  // noiseless product with white X: the output spectrum is the flat mean of S_H
  const auto model = ProcessModel::product_noise(AutocovarianceSpec::ar1(1.0, 0.5),
                                                 AutocovarianceSpec::white(1.0), 0.0);
  const auto psd = model_psd(model, 256);
  for (double v : psd.values) REQUIRE(v == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("model psd: gaussian kind delegates exactly") {
  const auto model = ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5));
  const auto direct = psd_from_autocovariance(AutocovarianceSpec::ar1(1.0, 0.5), 256);
  const auto via_model = model_psd(model, 256);
  REQUIRE(via_model.values == direct.values);
}

TEST_CASE("model covariance: two-point product is white at the block level") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 0.5);
  const auto cov = model_covariance(model, 3);
  REQUIRE(cov.first_row[0] == Catch::Approx(1.5));
  REQUIRE(cov.first_row[1] == 0.0);
  REQUIRE(cov.first_row[2] == 0.0);
}

TEST_CASE("model density: one-dimensional case collapses to a gaussian") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::white(1.0), 1.0);
  const auto density = model_density(model, 1);
  const auto reference = make_gaussian_1d(0.0, 2.0);
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
    Eigen::VectorXd v(1);
    v << x;
    REQUIRE(density.log_pdf(v) == Catch::Approx(reference.log_pdf(v)).margin(1e-12));
  }
}

TEST_CASE("model density: white H keeps every sign component identical") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::white(1.0), 1.0);
  const auto density = model_density(model, 2);
  const auto reference = make_gaussian(Eigen::VectorXd::Zero(2),
                                       2.0 * Eigen::MatrixXd::Identity(2, 2));
  Eigen::VectorXd v(2);
  v << 0.3, -1.7;
  REQUIRE(density.log_pdf(v) == Catch::Approx(reference.log_pdf(v)).margin(1e-12));
}

TEST_CASE("model density: correlated H with small noise is certifiably non-gaussian") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 0.1);
  const auto density = model_density(model, 2);
  const auto gauss = matched_gaussian(density);
  const auto samples = sample_path(model, 2, 100000, 29);
  const auto kl = kl_monte_carlo(density, gauss, samples);
  REQUIRE(kl.value > 5.0 * kl.std_error);
  REQUIRE(kl.value > 0.0);
}

TEST_CASE("model density normalizes to 1") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 0.5);
  for (int n : {1, 2}) {
    const auto density = model_density(model, n);
    QuadratureBox box = default_box(density, 10.0);
    Eigen::VectorXd x(n);
    PairwiseAccumulator mass;
    const std::int64_t points = n == 1 ? 20001 : 1201;
    if (n == 1) {
      const double dx = (box.hi(0) - box.lo(0)) / points;
      for (std::int64_t i = 0; i < points; ++i) {
        x(0) = box.lo(0) + (i + 0.5) * dx;
        mass.add(std::exp(density.log_pdf(x)) * dx);
      }
    } else {
      const double dx = (box.hi(0) - box.lo(0)) / points;
      const double dy = (box.hi(1) - box.lo(1)) / points;
      for (std::int64_t i = 0; i < points; ++i) {
        x(0) = box.lo(0) + (i + 0.5) * dx;
        for (std::int64_t j = 0; j < points; ++j) {
          x(1) = box.lo(1) + (j + 0.5) * dy;
          mass.add(std::exp(density.log_pdf(x)) * dx * dy);
        }
      }
    }
    REQUIRE(mass.total() == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("model density gradients satisfy the smoothing constants at every probe") {
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 0.5);
  for (int n : {1, 2, 4}) {
    const auto density = model_density(model, n);
    const auto constants = model_regularity(model, n);
    const auto report = verify_regularity(density, constants, ProbePlan{5000, 0.0, 31});
    REQUIRE(report.pass);
    REQUIRE(report.worst_margin >= 0.0);
  }
}

TEST_CASE("model density guards its domain") {
  const auto gaussian_model = ProcessModel::gaussian(AutocovarianceSpec::white(1.0));
  REQUIRE_THROWS_AS(model_density(gaussian_model, 2), InvalidInput);
  const auto model = ProcessModel::product_two_point(AutocovarianceSpec::white(1.0), 1.0);
  REQUIRE_THROWS_AS(model_density(model, 9), InvalidInput);
}

TEST_CASE("sample_path propagates factorization failures") {
  const auto model = ProcessModel::gaussian(AutocovarianceSpec::tabulated({1.0, 1.0}));
  REQUIRE_THROWS_AS(sample_path(model, 3, 10, 1), NumericalFailure);
}

TEST_CASE("model validation") {
  REQUIRE_THROWS_AS(ProcessModel::product_noise(AutocovarianceSpec::white(1.0),
                                                AutocovarianceSpec::white(1.0), -1.0),
                    InvalidInput);
  REQUIRE_THROWS_AS(sample_path(ProcessModel::gaussian(AutocovarianceSpec::white(1.0)), 0, 10, 1),
                    InvalidInput);
}
