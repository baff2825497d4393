#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "erb/autocovariance.hpp"
#include "erb/bounds.hpp"
#include "erb/estimators.hpp"
#include "erb/numeric.hpp"
#include "erb/regularity.hpp"
#include "erb/simulate.hpp"

namespace erb {

using nlohmann::json;

namespace detail {

inline const json& require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) {
    throw InvalidInput(path.empty() ? std::string("expected an object")
                                    : path + ": expected an object");
  }
  const auto it = j.find(key);
  if (it == j.end()) {
    throw InvalidInput((path.empty() ? key : path + "." + key) + ": missing required field");
  }
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw InvalidInput(path + ": expected a number");
  return j.get<double>();
}

inline double require_double(const json& j, const std::string& key, const std::string& path) {
  return as_double(require_field(j, key, path), join(path, key));
}

inline std::string require_string(const json& j, const std::string& key, const std::string& path) {
  const json& f = require_field(j, key, path);
  if (!f.is_string()) throw InvalidInput(join(path, key) + ": expected a string");
  return f.get<std::string>();
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// ---- AutocovarianceSpec <-> {kind, parameters} ----

inline json to_json(const AutocovarianceSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind());
  switch (spec.kind()) {
    case AutocovKind::white:
      j["variance"] = spec.variance_param();
      break;
    case AutocovKind::ar1:
      j["variance"] = spec.variance_param();
      j["coefficient"] = spec.ar_coefficient();
      break;
    case AutocovKind::ma:
      j["coefficients"] = spec.coefficients();
      j["innovation_variance"] = spec.variance_param();
      break;
    case AutocovKind::tabulated:
      j["values"] = spec.coefficients();
      break;
  }
  return j;
}

inline AutocovarianceSpec autocovariance_from_json(const json& j, const std::string& path) {
  const std::string kind = detail::require_string(j, "kind", path);
  try {
    if (kind == "white") {
      return AutocovarianceSpec::white(detail::require_double(j, "variance", path));
    }
    if (kind == "ar1") {
      return AutocovarianceSpec::ar1(detail::require_double(j, "variance", path),
                                     detail::require_double(j, "coefficient", path));
    }
    if (kind == "ma") {
      const json& taps = detail::require_field(j, "coefficients", path);
      if (!taps.is_array()) throw InvalidInput(detail::join(path, "coefficients") + ": expected an array");
      return AutocovarianceSpec::ma(taps.get<std::vector<double>>(),
                                    detail::require_double(j, "innovation_variance", path));
    }
    if (kind == "tabulated") {
      const json& values = detail::require_field(j, "values", path);
      if (!values.is_array()) throw InvalidInput(detail::join(path, "values") + ": expected an array");
      return AutocovarianceSpec::tabulated(values.get<std::vector<double>>());
    }
  } catch (const InvalidInput& e) {
    const std::string what = e.what();
    // prefix bare constructor messages with the config path
    if (what.find(path) == std::string::npos) throw InvalidInput(path + ": " + what);
    throw;
  }
  throw InvalidInput(detail::join(path, "kind") + ": unknown autocovariance kind '" + kind + "'");
}

// ---- ProcessModel ----

inline json to_json(const ProcessModel& model) {
  json j;
  j["kind"] = to_string(model.kind);
  switch (model.kind) {
    case ProcessKind::gaussian:
      j["autocovariance"] = to_json(model.spec_h);
      j["mean"] = model.mean;
      break;
    case ProcessKind::product_noise:
      j["h"] = to_json(model.spec_h);
      j["x"] = to_json(*model.spec_x);
      j["noise_variance"] = model.noise_variance;
      break;
    case ProcessKind::product_two_point:
      j["h"] = to_json(model.spec_h);
      j["noise_variance"] = model.noise_variance;
      break;
  }
  return j;
}

inline ProcessModel model_from_json(const json& j, const std::string& path) {
  const std::string kind = detail::require_string(j, "kind", path);
  if (kind == "gaussian") {
    AutocovarianceSpec spec = autocovariance_from_json(
        detail::require_field(j, "autocovariance", path), detail::join(path, "autocovariance"));
    const double mean = j.contains("mean") ? detail::require_double(j, "mean", path) : 0.0;
    return ProcessModel::gaussian(std::move(spec), mean);
  }
  if (kind == "product_noise" || kind == "product_two_point") {
    AutocovarianceSpec h = autocovariance_from_json(detail::require_field(j, "h", path),
                                                    detail::join(path, "h"));
    const double noise = detail::require_double(j, "noise_variance", path);
    if (!(noise >= 0.0)) {
      throw InvalidInput(detail::join(path, "noise_variance") + ": must be >= 0, got " +
                         std::to_string(noise));
    }
    if (kind == "product_noise") {
      AutocovarianceSpec x = autocovariance_from_json(detail::require_field(j, "x", path),
                                                      detail::join(path, "x"));
      return ProcessModel::product_noise(std::move(h), std::move(x), noise);
    }
    return ProcessModel::product_two_point(std::move(h), noise);
  }
  throw InvalidInput(detail::join(path, "kind") + ": unknown process kind '" + kind + "'");
}

// ---- RegularityConstants ----

inline json to_json(const RegularityConstants& r) {
  json j;
  j["c1"] = r.c1;
  j["c2"] = r.c2;
  j["growth"] = to_string(r.growth);
  if (r.growth == C2Growth::sqrt_n) j["sqrt_coefficient"] = r.sqrt_coefficient;
  return j;
}

// ---- EntropyBoundReport ----

inline json to_json(const EntropyBoundReport& r) {
  json j;
  j["n"] = r.n;
  j["upper_nats"] = r.upper_nats;
  j["kl_per_n_bound"] = r.kl_per_n_bound;
  j["lower_nats"] = r.lower_nats;
  j["constants"] = to_json(r.constants_used);
  j["second_moment"] = r.second_moment;
  return j;
}

inline std::string bound_report_csv_header() {
  return "n,upper,kl_bound,lower,c1,c2,c2_growth,second_moment";
}

inline std::string bound_report_csv_row(const EntropyBoundReport& r, double unit_scale = 1.0) {
  using detail::format_double;
  return std::to_string(r.n) + "," + format_double(r.upper_nats / unit_scale) + "," +
         format_double(r.kl_per_n_bound / unit_scale) + "," +
         format_double(r.lower_nats / unit_scale) + "," + format_double(r.constants_used.c1) +
         "," + format_double(r.constants_used.c2) + "," + to_string(r.constants_used.growth) +
         "," + format_double(r.second_moment);
}

// ---- probe reports ----

inline json to_json(const VerificationReport& r) {
  json j;
  j["pass"] = r.pass;
  j["worst_margin"] = r.worst_margin;
  j["argmin_probe"] = std::vector<double>(r.argmin_probe.data(),
                                          r.argmin_probe.data() + r.argmin_probe.size());
  j["probe_count"] = r.probe_count;
  j["seed"] = r.seed;
  return j;
}

inline json to_json(const EstimateWithError& e) {
  json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["method"] = e.method;
  j["seed"] = e.seed;
  j["count"] = e.count;
  return j;
}

inline std::string estimate_csv_header() { return "value,std_error,method,seed,count"; }

inline std::string estimate_csv_row(const EstimateWithError& e) {
  return detail::format_double(e.value) + "," + detail::format_double(e.std_error) + "," +
         e.method + "," + std::to_string(e.seed) + "," + std::to_string(e.count);
}

}  // namespace erb
