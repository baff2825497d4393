#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "erb/bounds.hpp"
#include "erb/corpus.hpp"
#include "erb/estimators.hpp"
#include "erb/serialize.hpp"
#include "erb/simulate.hpp"

namespace erb {

inline constexpr int kRunRecordFormatVersion = 1;

enum class ExperimentKind {
  bound_report,
  sandwich,
  prop1_check,
  theorem1_check,
  convergence_ladder,
  six_nats_sweep,
};

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::bound_report: return "bound_report";
    case ExperimentKind::sandwich: return "sandwich";
    case ExperimentKind::prop1_check: return "prop1_check";
    case ExperimentKind::theorem1_check: return "theorem1_check";
    case ExperimentKind::convergence_ladder: return "convergence_ladder";
    case ExperimentKind::six_nats_sweep: return "six_nats_sweep";
  }
  return "?";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "bound_report") return ExperimentKind::bound_report;
  if (s == "sandwich") return ExperimentKind::sandwich;
  if (s == "prop1_check") return ExperimentKind::prop1_check;
  if (s == "theorem1_check") return ExperimentKind::theorem1_check;
  if (s == "convergence_ladder") return ExperimentKind::convergence_ladder;
  if (s == "six_nats_sweep") return ExperimentKind::six_nats_sweep;
  throw InvalidInput("experiment: unknown kind '" + s + "'");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bound_report;
  std::optional<ProcessModel> model;
  std::vector<std::string> densities;  // prop1_check selector; empty = all certified 1d
  int grid_size = 4096;
  std::int64_t sample_count = 100000;
  int knn_k = 4;
  std::vector<int> block_ladder = {1, 2, 4, 8};
  std::vector<double> noise_grid = {1.0, 10.0, 100.0, 1000.0, 10000.0};
  std::vector<int> n_grid = {16, 64, 256, 1024};
  std::int64_t quantile_grid = 1 << 22;
  double bias_allowance = 0.05;
  std::uint64_t seed = 1;
  std::string unit = "nats";
  std::string out_dir = ".";
};

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  if (c.model) j["model"] = to_json(*c.model);
  if (!c.densities.empty()) j["densities"] = c.densities;
  j["grid_size"] = c.grid_size;
  j["sample_count"] = c.sample_count;
  j["knn_k"] = c.knn_k;
  j["block_ladder"] = c.block_ladder;
  j["noise_grid"] = c.noise_grid;
  j["n_grid"] = c.n_grid;
  j["quantile_grid"] = c.quantile_grid;
  j["bias_allowance"] = c.bias_allowance;
  j["seed"] = c.seed;
  j["unit"] = c.unit;
  j["out_dir"] = c.out_dir;
  return j;
}

// Parses a config object, collecting every schema violation with its field
// path. Accepts a stored run record as well (the resolved config is nested
// under "config"), so records replay directly.
inline ExperimentConfig config_from_json(const json& root, std::vector<std::string>* errors) {
  const json& j = (root.is_object() && root.contains("config") && root.contains("format_version"))
                      ? root.at("config")
                      : root;
  ExperimentConfig c;
  std::vector<std::string> local;
  const auto capture = [&local](const std::string& message) { local.push_back(message); };

  try {
    c.kind = experiment_kind_from_string(detail::require_string(j, "experiment", ""));
  } catch (const InvalidInput& e) {
    capture(e.what());
  }
  if (j.contains("model")) {
    try {
      c.model = model_from_json(j.at("model"), "model");
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  }
  const auto int_field = [&](const char* key, auto setter, auto validate, const char* rule) {
    if (!j.contains(key)) return;
    try {
      const json& f = j.at(key);
      if (!f.is_number_integer() && !f.is_number_unsigned()) {
        throw InvalidInput(std::string(key) + ": expected an integer");
      }
      const std::int64_t v = f.get<std::int64_t>();
      if (!validate(v)) throw InvalidInput(std::string(key) + ": " + rule);
      setter(v);
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  };
  int_field("grid_size", [&](std::int64_t v) { c.grid_size = static_cast<int>(v); },
            [](std::int64_t v) { return v >= 2 && v % 2 == 0; }, "must be a positive even integer");
  int_field("sample_count", [&](std::int64_t v) { c.sample_count = v; },
            [](std::int64_t v) { return v >= 1; }, "must be >= 1");
  int_field("knn_k", [&](std::int64_t v) { c.knn_k = static_cast<int>(v); },
            [](std::int64_t v) { return v >= 1; }, "must be >= 1");
  int_field("quantile_grid", [&](std::int64_t v) { c.quantile_grid = v; },
            [](std::int64_t v) { return v >= 2; }, "must be >= 2");
  int_field("seed", [&](std::int64_t v) { c.seed = static_cast<std::uint64_t>(v); },
            [](std::int64_t) { return true; }, "");

  const auto int_list = [&](const char* key, std::vector<int>& out) {
    if (!j.contains(key)) return;
    try {
      const json& f = j.at(key);
      if (!f.is_array() || f.empty()) throw InvalidInput(std::string(key) + ": expected a non-empty array");
      std::vector<int> values;
      for (const auto& item : f) {
        if (!item.is_number_integer() && !item.is_number_unsigned()) {
          throw InvalidInput(std::string(key) + ": expected integers");
        }
        const std::int64_t v = item.get<std::int64_t>();
        if (v < 1) throw InvalidInput(std::string(key) + ": entries must be >= 1");
        values.push_back(static_cast<int>(v));
      }
      out = std::move(values);
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  };
  int_list("block_ladder", c.block_ladder);
  int_list("n_grid", c.n_grid);

  if (j.contains("noise_grid")) {
    try {
      const json& f = j.at("noise_grid");
      if (!f.is_array() || f.empty()) throw InvalidInput("noise_grid: expected a non-empty array");
      std::vector<double> values;
      for (const auto& item : f) {
        if (!item.is_number()) throw InvalidInput("noise_grid: expected numbers");
        const double v = item.get<double>();
        if (!(v > 0.0)) throw InvalidInput("noise_grid: entries must be > 0");
        values.push_back(v);
      }
      c.noise_grid = std::move(values);
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  }
  if (j.contains("bias_allowance")) {
    try {
      const double v = detail::as_double(j.at("bias_allowance"), "bias_allowance");
      if (!(v >= 0.0)) throw InvalidInput("bias_allowance: must be >= 0");
      c.bias_allowance = v;
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  }
  if (j.contains("densities")) {
    try {
      const json& f = j.at("densities");
      if (!f.is_array()) throw InvalidInput("densities: expected an array of names");
      c.densities = f.get<std::vector<std::string>>();
    } catch (const InvalidInput& e) {
      capture(e.what());
    } catch (const json::exception&) {
      capture("densities: expected an array of names");
    }
  }
  if (j.contains("unit")) {
    try {
      const json& f = j.at("unit");
      if (!f.is_string() || (f.get<std::string>() != "nats" && f.get<std::string>() != "bits")) {
        throw InvalidInput("unit: expected \"nats\" or \"bits\"");
      }
      c.unit = f.get<std::string>();
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  }
  if (j.contains("out_dir")) {
    try {
      const json& f = j.at("out_dir");
      if (!f.is_string()) throw InvalidInput("out_dir: expected a string");
      c.out_dir = f.get<std::string>();
    } catch (const InvalidInput& e) {
      capture(e.what());
    }
  }

  if (errors) {
    *errors = std::move(local);
  } else if (!local.empty()) {
    std::string all = local.front();
    for (std::size_t i = 1; i < local.size(); ++i) all += "; " + local[i];
    throw InvalidInput(all);
  }
  return c;
}

struct ExperimentResult {
  int exit_code = 0;  // 0 clean, 2 when a bound is violated beyond tolerance
  std::string csv;
  json summary;
  std::vector<std::string> violations;
};

namespace detail {

inline double unit_scale(const ExperimentConfig& c) { return c.unit == "bits" ? kLn2 : 1.0; }

inline std::string csv_header_line(const ExperimentConfig& c) {
  return std::string("# erb-csv v1 experiment=") + to_string(c.kind) + " unit=" + c.unit + "\n";
}

inline void finish(ExperimentResult& result, const ExperimentConfig& config, json rows) {
  result.summary["format_version"] = kRunRecordFormatVersion;
  result.summary["experiment"] = to_string(config.kind);
  result.summary["unit"] = config.unit;
  result.summary["config"] = to_json(config);
  result.summary["rows"] = std::move(rows);
  result.summary["violations"] = result.violations;
  result.summary["pass"] = result.violations.empty();
  result.exit_code = result.violations.empty() ? 0 : 2;
}

inline ExperimentResult run_bound_report(const ExperimentConfig& config) {
  if (!config.model) throw InvalidInput("model: required for bound_report");
  const ProcessModel& model = *config.model;
  const auto constants = model_regularity(model, 1, config.grid_size);
  const auto report = lower_bound_rate(model_psd(model, config.grid_size), constants,
                                       model.coordinate_mean(), model.coordinate_variance());
  const double scale = unit_scale(config);

  ExperimentResult result;
  result.csv = csv_header_line(config) + bound_report_csv_header() + "\n" +
               bound_report_csv_row(report, scale) + "\n";
  if (!(report.lower_nats <= report.upper_nats)) {
    result.violations.push_back("bound_report: lower exceeds upper");
  }
  json rows = json::array();
  rows.push_back(to_json(report));
  finish(result, config, std::move(rows));
  return result;
}

inline ExperimentResult run_six_nats_sweep(const ExperimentConfig& config) {
  const auto flat = flat_spectrum(1.0, config.grid_size);
  const double scale = unit_scale(config);

  ExperimentResult result;
  std::ostringstream csv;
  csv << csv_header_line(config) << "noise_variance,upper,lower,gap\n";
  json rows = json::array();
  double previous_gap = std::numeric_limits<double>::infinity();
  for (double noise : config.noise_grid) {
    const auto report = product_noise_rate_bound(1.0, 1.0, noise, flat, flat);
    const double gap = report.upper_nats - report.lower_nats;
    csv << format_double(noise) << "," << format_double(report.upper_nats / scale) << ","
        << format_double(report.lower_nats / scale) << "," << format_double(gap / scale) << "\n";
    json row;
    row["noise_variance"] = noise;
    row["upper_nats"] = report.upper_nats;
    row["lower_nats"] = report.lower_nats;
    row["gap_nats"] = gap;
    rows.push_back(std::move(row));
    if (gap >= previous_gap) {
      result.violations.push_back("six_nats_sweep: gap is not decreasing at noise " +
                                  std::to_string(noise));
    }
    if (gap <= 6.0) {
      result.violations.push_back("six_nats_sweep: gap fell below its 6-nat limit at noise " +
                                  std::to_string(noise));
    }
    previous_gap = gap;
  }
  result.csv = csv.str();
  finish(result, config, std::move(rows));
  return result;
}

inline ExperimentResult run_convergence_ladder(const ExperimentConfig& config) {
  if (!config.model) throw InvalidInput("model: required for convergence_ladder");
  if (config.model->kind != ProcessKind::gaussian) {
    throw InvalidInput("model.kind: convergence_ladder needs a gaussian model");
  }
  const auto& spec = config.model->spec_h;
  const double rate = szego_entropy_rate(psd_from_autocovariance(spec, config.grid_size));
  const double scale = unit_scale(config);

  ExperimentResult result;
  std::ostringstream csv;
  csv << csv_header_line(config) << "block_n,finite_entropy,rate,gap\n";
  json rows = json::array();
  double previous_gap = std::numeric_limits<double>::infinity();
  for (int n : config.n_grid) {
    const double finite = gaussian_entropy_per_coordinate(build_covariance(spec, n));
    const double gap = std::abs(finite - rate);
    csv << n << "," << format_double(finite / scale) << "," << format_double(rate / scale) << ","
        << format_double(gap / scale) << "\n";
    json row;
    row["block_n"] = n;
    row["finite_entropy_nats"] = finite;
    row["rate_nats"] = rate;
    row["gap_nats"] = gap;
    rows.push_back(std::move(row));
    if (gap >= previous_gap) {
      result.violations.push_back("convergence_ladder: |finite - rate| did not decrease at n = " +
                                  std::to_string(n));
    }
    previous_gap = gap;
  }
  result.csv = csv.str();
  finish(result, config, std::move(rows));
  return result;
}

inline ExperimentResult run_sandwich(const ExperimentConfig& config) {
  if (!config.model) throw InvalidInput("model: required for sandwich");
  const ProcessModel& model = *config.model;
  const auto constants = model_regularity(model, 1, config.grid_size);
  const auto rate_report = lower_bound_rate(model_psd(model, config.grid_size), constants,
                                            model.coordinate_mean(), model.coordinate_variance());
  const double scale = unit_scale(config);

  ExperimentResult result;
  std::ostringstream csv;
  csv << csv_header_line(config) << "block_n,estimate,std_error,lower,upper_n,pass\n";
  json rows = json::array();
  for (int n : config.block_ladder) {
    const auto samples =
        sample_path(model, n, config.sample_count, derive_seed(config.seed, static_cast<std::uint64_t>(n)));
    const auto estimate = entropy_knn(samples, config.knn_k);
    const double per_coord = estimate.value / n;
    const double se = estimate.std_error / n;
    const double upper_n = gaussian_entropy_per_coordinate(model_covariance(model, n));
    const bool ok = per_coord >= rate_report.lower_nats - 3.0 * se - config.bias_allowance &&
                    per_coord <= upper_n + 3.0 * se;
    csv << n << "," << format_double(per_coord / scale) << "," << format_double(se / scale) << ","
        << format_double(rate_report.lower_nats / scale) << "," << format_double(upper_n / scale)
        << "," << (ok ? "true" : "false") << "\n";
    json row;
    row["block_n"] = n;
    row["estimate_nats"] = per_coord;
    row["std_error_nats"] = se;
    row["lower_nats"] = rate_report.lower_nats;
    row["upper_n_nats"] = upper_n;
    row["method"] = estimate.method;
    row["pass"] = ok;
    rows.push_back(std::move(row));
    if (!ok) {
      result.violations.push_back("sandwich: block n = " + std::to_string(n) +
                                  " estimate escaped [lower - 3se - bias, upper + 3se]");
    }
  }
  result.csv = csv.str();
  finish(result, config, std::move(rows));
  return result;
}

inline ExperimentResult run_prop1_check(const ExperimentConfig& config) {
  const auto corpus = built_in_densities();
  std::vector<std::string> names = config.densities;
  if (names.empty()) {
    for (const auto& d : corpus) {
      if (d.density.dimension == 1 && d.constants && !d.gaussian_exact) names.push_back(d.name);
    }
  }
  const double scale = unit_scale(config);

  ExperimentResult result;
  std::ostringstream csv;
  csv << csv_header_line(config) << "density,kl,delta,w2,pass\n";
  json rows = json::array();
  for (const auto& name : names) {
    const auto& entry = find_density(corpus, name);
    if (entry.density.dimension != 1) {
      throw InvalidInput("densities: '" + name + "' is not one-dimensional");
    }
    if (!entry.constants) {
      throw InvalidInput("densities: '" + name + "' carries no certified constants");
    }
    const auto& f = entry.density;
    const auto g = matched_gaussian(f);
    const auto hf = entropy_quadrature(f, default_box(f, 40.0), 32001);
    const auto hg = entropy_quadrature(g, default_box(g, 40.0), 32001);
    const double kl = hg.value - hf.value;
    const double w2 = w2_quantile_1d(f, g, config.quantile_grid);
    const double m2 = f.mean(0) * f.mean(0) + f.covariance(0, 0);
    const double delta =
        entropy_difference_bound(entry.constants->c1, entry.constants->c2, m2, m2, w2);
    const double quad_tol = 3.0 * (hf.std_error + hg.std_error) + 1e-9;
    const bool ok = kl >= -quad_tol && kl <= delta + quad_tol;
    csv << name << "," << format_double(kl / scale) << "," << format_double(delta / scale) << ","
        << format_double(w2) << "," << (ok ? "true" : "false") << "\n";
    json row;
    row["density"] = name;
    row["kl_nats"] = kl;
    row["delta_nats"] = delta;
    row["w2"] = w2;
    row["pass"] = ok;
    rows.push_back(std::move(row));
    if (!ok) {
      result.violations.push_back("prop1_check: '" + name +
                                  "' violated 0 <= KL <= delta (kl = " + std::to_string(kl) +
                                  ", delta = " + std::to_string(delta) + ")");
    }
  }
  result.csv = csv.str();
  finish(result, config, std::move(rows));
  return result;
}

inline ExperimentResult run_theorem1_check(const ExperimentConfig& config) {
  // default family: sign-product with a strongly correlated ar1 factor
  const AutocovarianceSpec h_spec =
      config.model ? config.model->spec_h : AutocovarianceSpec::ar1(1.0, 0.9);
  const double scale = unit_scale(config);

  ExperimentResult result;
  std::ostringstream csv;
  csv << csv_header_line(config)
      << "noise_variance,block_n,kl_per_n,std_error,bound,margin_se,pass\n";
  json rows = json::array();
  std::uint64_t stream = 0;
  for (double noise : config.noise_grid) {
    const auto model = ProcessModel::product_two_point(h_spec, noise);
    for (int n : config.block_ladder) {
      if (n > 8) throw InvalidInput("block_ladder: theorem1_check needs n <= 8");
      const auto f = model_density(model, n);
      const auto g = matched_gaussian(f);
      const auto samples =
          sample_path(model, n, config.sample_count, derive_seed(config.seed, ++stream));
      const auto kl = kl_monte_carlo(f, g, samples);
      const double kl_per_n = kl.value / n;
      const double se = kl.std_error / n;
      const double bound =
          stationary_kl_bound(model_regularity(model, n), model.coordinate_variance(), n);
      const double margin_se = se > 0.0 ? (bound - kl_per_n) / se
                                        : std::numeric_limits<double>::infinity();
      const bool ok = kl_per_n <= bound && margin_se >= 5.0;
      csv << format_double(noise) << "," << n << "," << format_double(kl_per_n / scale) << ","
          << format_double(se / scale) << "," << format_double(bound / scale) << ","
          << format_double(margin_se) << "," << (ok ? "true" : "false") << "\n";
      json row;
      row["noise_variance"] = noise;
      row["block_n"] = n;
      row["kl_per_n_nats"] = kl_per_n;
      row["std_error_nats"] = se;
      row["bound_nats"] = bound;
      row["margin_se"] = margin_se;
      row["pass"] = ok;
      rows.push_back(std::move(row));
      if (!ok) {
        result.violations.push_back("theorem1_check: noise " + std::to_string(noise) + ", n = " +
                                    std::to_string(n) + " violated the KL bound margin");
      }
    }
  }
  result.csv = csv.str();
  finish(result, config, std::move(rows));
  return result;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::bound_report: return detail::run_bound_report(config);
    case ExperimentKind::sandwich: return detail::run_sandwich(config);
    case ExperimentKind::prop1_check: return detail::run_prop1_check(config);
    case ExperimentKind::theorem1_check: return detail::run_theorem1_check(config);
    case ExperimentKind::convergence_ladder: return detail::run_convergence_ladder(config);
    case ExperimentKind::six_nats_sweep: return detail::run_six_nats_sweep(config);
  }
  throw InvalidInput("experiment: unknown kind");
}

// Writes <out_dir>/<experiment>.csv and <out_dir>/<experiment>_summary.json.
inline void write_result_files(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const std::string base = (fs::path(config.out_dir) / to_string(config.kind)).string();
  {
    std::ofstream csv(base + ".csv");
    if (!csv) throw InvalidInput("out_dir: cannot write to '" + config.out_dir + "'");
    csv << result.csv;
  }
  {
    std::ofstream summary(base + "_summary.json");
    if (!summary) throw InvalidInput("out_dir: cannot write to '" + config.out_dir + "'");
    summary << result.summary.dump(2) << "\n";
  }
}

inline std::string list_corpus_text(bool empty = false) {
  std::ostringstream os;
  if (empty) return os.str();
  os << "densities:\n";
  for (const auto& d : built_in_densities()) {
    os << "  " << d.name << " — " << d.description << "\n";
    if (d.constants) {
      os << "      constants: c1 = " << d.constants->c1 << ", c2 = " << d.constants->c2
         << " (" << to_string(d.constants->growth) << ")\n";
    }
    os << "      certified by: " << d.certification << "\n"
       << "      log-concave: " << (d.log_concave ? "yes" : "no") << "\n";
  }
  os << "processes:\n";
  for (const auto& p : built_in_processes()) {
    os << "  " << p.name << " — " << p.description << "\n"
       << "      constants: c1 = " << p.constants.c1 << ", c2 = " << p.constants.c2 << " ("
       << to_string(p.constants.growth) << ")\n"
       << "      certified by: " << p.certification << "\n";
  }
  return os.str();
}

// The built-in invariant battery behind `erb check`: one line per check,
// exit 2 when any bound is violated.
inline int run_check_suite(std::ostream& os) {
  struct Check {
    std::string name;
    ExperimentConfig config;
  };
  std::vector<Check> checks;
  {
    ExperimentConfig c;
    c.kind = ExperimentKind::six_nats_sweep;
    checks.push_back({"six_nats_sweep (flat unit spectra)", c});
  }
  {
    ExperimentConfig c;
    c.kind = ExperimentKind::convergence_ladder;
    c.model = ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5));
    checks.push_back({"convergence_ladder (gaussian ar1)", c});
  }
  {
    ExperimentConfig c;
    c.kind = ExperimentKind::prop1_check;
    c.quantile_grid = 1 << 20;
    checks.push_back({"prop1_check (certified 1d corpus)", c});
  }
  {
    ExperimentConfig c;
    c.kind = ExperimentKind::theorem1_check;
    c.noise_grid = {0.5, 1.0};
    c.block_ladder = {1, 2, 4};
    c.sample_count = 20000;
    checks.push_back({"theorem1_check (sign-product family)", c});
  }
  {
    ExperimentConfig c;
    c.kind = ExperimentKind::sandwich;
    c.model = ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5));
    c.block_ladder = {1, 2, 4};
    c.sample_count = 20000;
    checks.push_back({"sandwich (gaussian ar1)", c});
  }
  {
    ExperimentConfig c;
    c.kind = ExperimentKind::sandwich;
    c.model = ProcessModel::product_noise(AutocovarianceSpec::white(1.0),
                                          AutocovarianceSpec::white(1.0), 1.0);
    c.block_ladder = {1, 2, 4};
    c.sample_count = 20000;
    checks.push_back({"sandwich (product white)", c});
  }

  int exit_code = 0;
  for (const auto& check : checks) {
    const auto result = run_experiment(check.config);
    if (result.exit_code == 0) {
      os << "[PASS] " << check.name << "\n";
    } else {
      os << "[FAIL] " << check.name << "\n";
      for (const auto& v : result.violations) os << "       " << v << "\n";
      exit_code = 2;
    }
  }
  return exit_code;
}

}  // namespace erb
