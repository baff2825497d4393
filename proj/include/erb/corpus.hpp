#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "erb/density.hpp"
#include "erb/regularity.hpp"
#include "erb/rng.hpp"
#include "erb/sample_matrix.hpp"
#include "erb/simulate.hpp"

namespace erb {

// A test density with everything the experiment suites need: evaluators,
// certified constants where a closed-form gradient bound exists, an exact
// sampler, and the expected log-concavity classification.
struct CorpusDensity {
  std::string name;
  std::string description;
  std::string certification;  // how the constants are known
  DensityHandle density;
  std::optional<RegularityConstants> constants;
  bool log_concave = false;
  bool gaussian_exact = false;  // true when the density is exactly Gaussian
  std::function<SampleMatrix(std::int64_t, std::uint64_t)> sampler;
};

struct CorpusProcess {
  std::string name;
  std::string description;
  std::string certification;
  ProcessModel model;
  RegularityConstants constants;  // process-level, valid for every block size
};

namespace detail {

inline SampleMatrix gaussian_sampler_1d(double mean, double sd, std::int64_t count,
                                        std::uint64_t seed, const std::string& provenance) {
  SampleMatrix m;
  m.seed = seed;
  m.provenance = provenance;
  m.values.resize(count, 1);
  const CounterRng rng{seed};
  for (std::int64_t i = 0; i < count; ++i) {
    m.values(i, 0) = mean + sd * rng.normal(static_cast<std::uint64_t>(i));
  }
  return m;
}

// equal-weight two-component mixture of Gaussians; component choice and
// noise come from separate sub-streams so the draws stay independent
inline SampleMatrix mixture_sampler_1d(double mean_a, double mean_b, double sd, std::int64_t count,
                                       std::uint64_t seed, const std::string& provenance) {
  SampleMatrix m;
  m.seed = seed;
  m.provenance = provenance;
  m.values.resize(count, 1);
  const CounterRng pick{derive_seed(seed, 1)};
  const CounterRng noise{derive_seed(seed, 2)};
  for (std::int64_t i = 0; i < count; ++i) {
    const std::uint64_t ctr = static_cast<std::uint64_t>(i);
    const double mean = pick.sign(ctr) > 0 ? mean_a : mean_b;
    m.values(i, 0) = mean + sd * noise.normal(ctr);
  }
  return m;
}

inline DensityHandle mixture_1d(double mean_a, double mean_b, double variance) {
  std::vector<double> w{0.5, 0.5};
  std::vector<Eigen::VectorXd> means(2, Eigen::VectorXd::Zero(1));
  means[0](0) = mean_a;
  means[1](0) = mean_b;
  std::vector<Eigen::MatrixXd> covs(2, Eigen::MatrixXd::Constant(1, 1, variance));
  return make_gaussian_mixture(std::move(w), std::move(means), std::move(covs));
}

}  // namespace detail

inline std::vector<CorpusDensity> built_in_densities() {
  std::vector<CorpusDensity> corpus;

  {
    CorpusDensity d;
    d.name = "standard_gaussian";
    d.description = "N(0, 1)";
    d.certification = "inverse-covariance bound: |d/dx ln f| = |x|";
    d.density = make_standard_gaussian(1);
    d.constants = RegularityConstants::fixed(1.0, 0.0);
    d.log_concave = true;
    d.gaussian_exact = true;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      return detail::gaussian_sampler_1d(0.0, 1.0, count, seed, "standard_gaussian");
    };
    corpus.push_back(std::move(d));
  }
  {
    CorpusDensity d;
    d.name = "gaussian_var4";
    d.description = "N(0, 4)";
    d.certification = "inverse-covariance bound: c1 = 1/4";
    d.density = make_gaussian_1d(0.0, 4.0);
    d.constants = RegularityConstants::fixed(0.25, 0.0);
    d.log_concave = true;
    d.gaussian_exact = true;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      return detail::gaussian_sampler_1d(0.0, 2.0, count, seed, "gaussian_var4");
    };
    corpus.push_back(std::move(d));
  }
  {
    CorpusDensity d;
    d.name = "gaussian_sharp";
    d.description = "N(0, 1e-4)";
    // 1e-6 relative headroom over the exact 1/variance certificate keeps
    // the probe margin positive under round-off
    d.certification = "inverse-covariance bound: c1 = 1e4 (+1e-6 headroom)";
    d.density = make_gaussian_1d(0.0, 1e-4);
    d.constants = RegularityConstants::fixed(1e4 * (1.0 + 1e-6), 0.0);
    d.log_concave = true;
    d.gaussian_exact = true;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      return detail::gaussian_sampler_1d(0.0, 1e-2, count, seed, "gaussian_sharp");
    };
    corpus.push_back(std::move(d));
  }
  {
    CorpusDensity d;
    d.name = "logistic";
    d.description = "e^x/(1+e^x)^2, entropy exactly 2 nats";
    d.certification = "gradient bound |tanh(x/2)| < 1: any c1 > 0 with c2 = 1 (0.01 stored)";
    d.density = make_logistic();
    d.constants = RegularityConstants::fixed(0.01, 1.0);
    d.log_concave = true;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      SampleMatrix m;
      m.seed = seed;
      m.provenance = "logistic";
      m.values.resize(count, 1);
      const CounterRng rng{seed};
      for (std::int64_t i = 0; i < count; ++i) {
        const double u = rng.uniform(static_cast<std::uint64_t>(i));
        m.values(i, 0) = std::log(u / (1.0 - u));
      }
      return m;
    };
    corpus.push_back(std::move(d));
  }
  {
    CorpusDensity d;
    d.name = "mixture_pm2";
    d.description = "0.5 N(-2, 1) + 0.5 N(2, 1)";
    d.certification = "mixture gradient bound: |d/dx ln f| <= |x| + 2";
    d.density = detail::mixture_1d(-2.0, 2.0, 1.0);
    d.constants = RegularityConstants::fixed(1.0, 2.0);
    d.log_concave = false;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      return detail::mixture_sampler_1d(-2.0, 2.0, 1.0, count, seed, "mixture_pm2");
    };
    corpus.push_back(std::move(d));
  }
  {
    CorpusDensity d;
    d.name = "mixture_0_6";
    d.description = "0.5 N(0, 1) + 0.5 N(6, 1)";
    d.certification = "mixture gradient bound: |d/dx ln f| <= |x| + 6";
    d.density = detail::mixture_1d(0.0, 6.0, 1.0);
    d.constants = RegularityConstants::fixed(1.0, 6.0);
    d.log_concave = false;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      return detail::mixture_sampler_1d(0.0, 6.0, 1.0, count, seed, "mixture_0_6");
    };
    corpus.push_back(std::move(d));
  }
  {
    // two-point signs smoothed by Gaussian noise: B + Z, B = +/-1, var(Z) = 0.5
    CorpusDensity d;
    d.name = "smoothed_two_point";
    d.description = "0.5 N(-1, 0.5) + 0.5 N(1, 0.5)";
    d.certification = "gaussian-smoothing bound: c1 = 3/v, c2 = 4 E|B|/v at v = 0.5";
    d.density = detail::mixture_1d(-1.0, 1.0, 0.5);
    d.constants = smoothing_regularity_constants(0.5, 1.0);
    d.log_concave = false;
    d.sampler = [](std::int64_t count, std::uint64_t seed) {
      SampleMatrix m;
      m.seed = seed;
      m.provenance = "smoothed_two_point";
      m.values.resize(count, 1);
      const CounterRng pick{derive_seed(seed, 1)};
      const CounterRng noise{derive_seed(seed, 2)};
      const double sd = std::sqrt(0.5);
      for (std::int64_t i = 0; i < count; ++i) {
        const std::uint64_t ctr = static_cast<std::uint64_t>(i);
        m.values(i, 0) = pick.sign(ctr) + sd * noise.normal(ctr);
      }
      return m;
    };
    corpus.push_back(std::move(d));
  }
  {
    // block density of the sign-product family at n = 2: a genuinely
    // non-Gaussian 4-component mixture
    CorpusDensity d;
    const auto model = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 0.1);
    d.name = "smoothed_two_point_2d";
    d.description = "sign-product block density, ar1(1, 0.9) factor, noise 0.1, n = 2";
    d.certification = "gaussian-smoothing bound: c1 = 3/v, c2 = 4 sqrt(n r_H(0))/v at v = 0.1";
    d.density = model_density(model, 2);
    d.constants = model_regularity(model, 2);
    d.log_concave = false;
    d.sampler = [model](std::int64_t count, std::uint64_t seed) {
      return sample_path(model, 2, count, seed);
    };
    corpus.push_back(std::move(d));
  }

  return corpus;
}

inline std::vector<CorpusProcess> built_in_processes() {
  std::vector<CorpusProcess> corpus;
  corpus.push_back(CorpusProcess{
      "gaussian_white",
      "i.i.d. N(0, 1)",
      "spectral floor: c1 = 1/inf S = 1",
      ProcessModel::gaussian(AutocovarianceSpec::white(1.0)),
      gaussian_regularity_process(AutocovarianceSpec::white(1.0)),
  });
  corpus.push_back(CorpusProcess{
      "gaussian_ar1",
      "gaussian ar1(1, 0.5)",
      "spectral floor: c1 = 1/inf S = 3",
      ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5)),
      gaussian_regularity_process(AutocovarianceSpec::ar1(1.0, 0.5)),
  });
  const auto product_white = ProcessModel::product_noise(AutocovarianceSpec::white(1.0),
                                                         AutocovarianceSpec::white(1.0), 1.0);
  corpus.push_back(CorpusProcess{
      "product_white",
      "H .* X + Z, white unit factors, unit noise",
      "gaussian-smoothing bound: c1 = 3, c2 = 4 sqrt(n)",
      product_white,
      model_regularity(product_white, 1),
  });
  const auto two_point = ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 1.0);
  corpus.push_back(CorpusProcess{
      "two_point_ar1",
      "H .* X + Z, ar1(1, 0.9) factor, sign X, unit noise",
      "gaussian-smoothing bound: c1 = 3, c2 = 4 sqrt(n)",
      two_point,
      model_regularity(two_point, 1),
  });
  return corpus;
}

inline const CorpusDensity& find_density(const std::vector<CorpusDensity>& corpus,
                                         const std::string& name) {
  for (const auto& d : corpus) {
    if (d.name == name) return d;
  }
  throw InvalidInput("unknown corpus density '" + name + "'");
}

}  // namespace erb
