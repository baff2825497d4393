#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "erb/numeric.hpp"

namespace erb {

enum class AutocovKind { white, ar1, ma, tabulated };

inline const char* to_string(AutocovKind k) {
  switch (k) {
    case AutocovKind::white: return "white";
    case AutocovKind::ar1: return "ar1";
    case AutocovKind::ma: return "ma";
    case AutocovKind::tabulated: return "tabulated";
  }
  return "?";
}

// Autocovariance function r(l) of a stationary process, even in the lag:
// r(-l) = r(l). Four parametric families; all absolutely summable.
class AutocovarianceSpec {
 public:
  // i.i.d. samples: r(0) = variance, r(l) = 0 otherwise.
  static AutocovarianceSpec white(double variance) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
      throw InvalidInput("white: variance must be finite and >= 0");
    }
    AutocovarianceSpec s;
    s.kind_ = AutocovKind::white;
    s.variance_ = variance;
    return s;
  }

  // Geometric decay r(l) = variance * coefficient^|l|, |coefficient| < 1.
  static AutocovarianceSpec ar1(double variance, double coefficient) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
      throw InvalidInput("ar1: variance must be finite and >= 0");
    }
    if (!(std::abs(coefficient) < 1.0)) {
      throw InvalidInput("ar1: |coefficient| must be < 1, got " + std::to_string(coefficient));
    }
    AutocovarianceSpec s;
    s.kind_ = AutocovKind::ar1;
    s.variance_ = variance;
    s.coefficient_ = coefficient;
    return s;
  }

  // Moving average with taps b_0..b_q and innovation variance v:
  // r(l) = v * sum_k b_k b_{k+|l|}, zero beyond lag q.
  static AutocovarianceSpec ma(std::vector<double> coefficients, double innovation_variance) {
    if (coefficients.empty()) {
      throw InvalidInput("ma: coefficient list must be non-empty");
    }
    for (double b : coefficients) {
      if (!std::isfinite(b)) throw InvalidInput("ma: coefficients must be finite");
    }
    if (!(innovation_variance >= 0.0) || !std::isfinite(innovation_variance)) {
      throw InvalidInput("ma: innovation variance must be finite and >= 0");
    }
    AutocovarianceSpec s;
    s.kind_ = AutocovKind::ma;
    s.variance_ = innovation_variance;
    s.values_ = std::move(coefficients);
    return s;
  }

  // Stored lags r(0)..r(K-1), symmetric extension, zero beyond the table.
  static AutocovarianceSpec tabulated(std::vector<double> values) {
    if (values.empty()) {
      throw InvalidInput("tabulated: value list must be non-empty");
    }
    double abs_sum = 0.0;
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw InvalidInput(
            "tabulated: autocovariance is not absolutely summable (non-finite entry)");
      }
      abs_sum += std::abs(v);
    }
    if (!std::isfinite(abs_sum)) {
      throw InvalidInput("tabulated: sum of |values| overflows; not absolutely summable");
    }
    if (!(values[0] >= 0.0)) {
      throw InvalidInput("tabulated: r(0) must be >= 0");
    }
    for (std::size_t l = 1; l < values.size(); ++l) {
      if (std::abs(values[l]) > values[0]) {
        throw InvalidInput("tabulated: |r(" + std::to_string(l) +
                           ")| exceeds r(0); not a valid autocovariance");
      }
    }
    AutocovarianceSpec s;
    s.kind_ = AutocovKind::tabulated;
    s.values_ = std::move(values);
    return s;
  }

  AutocovKind kind() const { return kind_; }

  // r(lag)
  double operator()(std::int64_t lag) const {
    const std::int64_t l = lag < 0 ? -lag : lag;
    switch (kind_) {
      case AutocovKind::white:
        return l == 0 ? variance_ : 0.0;
      case AutocovKind::ar1:
        return variance_ * std::pow(coefficient_, static_cast<double>(l));
      case AutocovKind::ma: {
        const std::int64_t q = static_cast<std::int64_t>(values_.size()) - 1;
        if (l > q) return 0.0;
        double acc = 0.0;
        for (std::int64_t k = 0; k + l <= q; ++k) {
          acc += values_[static_cast<std::size_t>(k)] * values_[static_cast<std::size_t>(k + l)];
        }
        return variance_ * acc;
      }
      case AutocovKind::tabulated:
        return l < static_cast<std::int64_t>(values_.size())
                   ? values_[static_cast<std::size_t>(l)]
                   : 0.0;
    }
    return 0.0;
  }

  double r0() const { return (*this)(0); }

  // sum over all lags of |r(l)|; finite for every representable family.
  double abs_sum() const {
    switch (kind_) {
      case AutocovKind::white:
        return variance_;
      case AutocovKind::ar1: {
        const double a = std::abs(coefficient_);
        return variance_ * (1.0 + a) / (1.0 - a);
      }
      case AutocovKind::ma: {
        const std::int64_t q = static_cast<std::int64_t>(values_.size()) - 1;
        double acc = std::abs((*this)(0));
        for (std::int64_t l = 1; l <= q; ++l) acc += 2.0 * std::abs((*this)(l));
        return acc;
      }
      case AutocovKind::tabulated: {
        double acc = std::abs(values_[0]);
        for (std::size_t l = 1; l < values_.size(); ++l) acc += 2.0 * std::abs(values_[l]);
        return acc;
      }
    }
    return 0.0;
  }

  // Smallest L with sum_{|m|>L} |r(m)| < tail_rel * r(0), capped. Tabulated
  // specs keep every stored lag; ma tails vanish exactly beyond the order.
  int default_lag_cutoff(double tail_rel = 1e-10, int cap = 100000) const {
    switch (kind_) {
      case AutocovKind::white:
        return 0;
      case AutocovKind::ma:
        return static_cast<int>(values_.size()) - 1;
      case AutocovKind::tabulated:
        return static_cast<int>(values_.size()) - 1;
      case AutocovKind::ar1: {
        const double a = std::abs(coefficient_);
        if (a == 0.0 || variance_ == 0.0) return 0;
        // tail(L) = 2 r0 a^{L+1} / (1-a); want the smallest L below target.
        const double target = tail_rel * (1.0 - a) / 2.0;
        const double steps = std::log(target) / std::log(a);
        int cut = static_cast<int>(std::ceil(steps)) - 1;
        if (cut < 0) cut = 0;
        while (cut < cap && std::pow(a, cut + 1) >= target) ++cut;
        return cut;
      }
    }
    return 0;
  }

  // ma taps or tabulated lag values, depending on kind.
  const std::vector<double>& coefficients() const { return values_; }
  double variance_param() const { return variance_; }
  double ar_coefficient() const { return coefficient_; }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case AutocovKind::white:
        os << "white(" << variance_ << ")";
        break;
      case AutocovKind::ar1:
        os << "ar1(" << variance_ << ", " << coefficient_ << ")";
        break;
      case AutocovKind::ma:
        os << "ma(q=" << values_.size() - 1 << ", innovation=" << variance_ << ")";
        break;
      case AutocovKind::tabulated:
        os << "tabulated(" << values_.size() << " lags)";
        break;
    }
    return os.str();
  }

 private:
  AutocovarianceSpec() = default;

  AutocovKind kind_ = AutocovKind::white;
  double variance_ = 1.0;    // white/ar1: r(0); ma: innovation variance
  double coefficient_ = 0.0; // ar1 decay
  std::vector<double> values_;
};

}  // namespace erb
