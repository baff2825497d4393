#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "erb/experiments.hpp"
#include "erb/serialize.hpp"

using namespace erb;

TEST_CASE("autocovariance specs round-trip through json") {
  const auto specs = {
      AutocovarianceSpec::white(2.0),
      AutocovarianceSpec::ar1(1.5, -0.25),
      AutocovarianceSpec::ma({1.0, 0.5, 0.25}, 0.3),
      AutocovarianceSpec::tabulated({1.0, 0.4}),
  };
  for (const auto& spec : specs) {
    const auto back = autocovariance_from_json(to_json(spec), "spec");
    REQUIRE(back.kind() == spec.kind());
    for (int l = 0; l < 6; ++l) REQUIRE(back(l) == spec(l));
  }
}

TEST_CASE("process models round-trip through json") {
  const auto models = {
      ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5), 0.25),
      ProcessModel::product_noise(AutocovarianceSpec::white(1.0), AutocovarianceSpec::white(2.0),
                                  0.5),
      ProcessModel::product_two_point(AutocovarianceSpec::ar1(1.0, 0.9), 1.0),
  };
  for (const auto& model : models) {
    const auto back = model_from_json(to_json(model), "model");
    REQUIRE(back.kind == model.kind);
    REQUIRE(back.coordinate_variance() == Catch::Approx(model.coordinate_variance()));
    REQUIRE(back.describe() == model.describe());
  }
}

TEST_CASE("schema violations carry their field paths") {
  json bad;
  bad["kind"] = "product_noise";
  bad["h"] = to_json(AutocovarianceSpec::white(1.0));
  bad["x"] = to_json(AutocovarianceSpec::white(1.0));
  bad["noise_variance"] = -1.0;
  try {
    model_from_json(bad, "model");
    FAIL("expected a schema error");
  } catch (const InvalidInput& e) {
    REQUIRE(std::string(e.what()).find("model.noise_variance") != std::string::npos);
  }

  json missing;
  missing["kind"] = "gaussian";
  try {
    model_from_json(missing, "model");
    FAIL("expected a schema error");
  } catch (const InvalidInput& e) {
    REQUIRE(std::string(e.what()).find("model.autocovariance") != std::string::npos);
  }
}

TEST_CASE("config parsing collects every violation with paths") {
  json j;
  j["experiment"] = "sandwich";
  j["model"] = {{"kind", "product_noise"},
                {"h", to_json(AutocovarianceSpec::white(1.0))},
                {"x", to_json(AutocovarianceSpec::white(1.0))},
                {"noise_variance", -2.0}};
  j["grid_size"] = 7;  // odd
  j["unit"] = "furlongs";
  std::vector<std::string> errors;
  config_from_json(j, &errors);
  REQUIRE(errors.size() == 3);
  bool saw_noise = false, saw_grid = false, saw_unit = false;
  for (const auto& e : errors) {
    if (e.find("model.noise_variance") != std::string::npos) saw_noise = true;
    if (e.find("grid_size") != std::string::npos) saw_grid = true;
    if (e.find("unit") != std::string::npos) saw_unit = true;
  }
  REQUIRE(saw_noise);
  REQUIRE(saw_grid);
  REQUIRE(saw_unit);
}

TEST_CASE("six nats sweep: gap decreases toward 6 and ends near the derived endpoint") {
  ExperimentConfig config;
  config.kind = ExperimentKind::six_nats_sweep;
  config.grid_size = 512;
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 0);
  REQUIRE(result.summary["pass"].get<bool>());
  const auto& rows = result.summary["rows"];
  REQUIRE(rows.size() == 5);
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    const double gap = row["gap_nats"].get<double>();
    REQUIRE(gap > 6.0);
    REQUIRE(gap < previous);
    previous = gap;
  }
  REQUIRE(rows.back()["gap_nats"].get<double>() == Catch::Approx(6.0807).margin(1e-3));
  REQUIRE(result.csv.find("# erb-csv v1 experiment=six_nats_sweep unit=nats") == 0);
}

TEST_CASE("bound report: csv schema and internal consistency") {
  ExperimentConfig config;
  config.kind = ExperimentKind::bound_report;
  config.model = ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5));
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 0);
  std::istringstream csv(result.csv);
  std::string comment, header, row;
  std::getline(csv, comment);
  std::getline(csv, header);
  std::getline(csv, row);
  REQUIRE(header == "n,upper,kl_bound,lower,c1,c2,c2_growth,second_moment");
  REQUIRE(row.substr(0, 2) == "0,");
  const auto& json_row = result.summary["rows"][0];
  REQUIRE(json_row["lower_nats"].get<double>() <= json_row["upper_nats"].get<double>());
}

TEST_CASE("convergence ladder passes for the gaussian ar1 model") {
  ExperimentConfig config;
  config.kind = ExperimentKind::convergence_ladder;
  config.model = ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5));
  config.n_grid = {16, 64, 256};
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 0);
}

TEST_CASE("prop1 check passes on the certified corpus") {
  ExperimentConfig config;
  config.kind = ExperimentKind::prop1_check;
  config.quantile_grid = 1 << 18;
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 0);
  REQUIRE(result.summary["rows"].size() == 4);  // all certified non-gaussian 1d densities
  for (const auto& row : result.summary["rows"]) {
    REQUIRE(row["kl_nats"].get<double>() >= -1e-9);
    REQUIRE(row["kl_nats"].get<double>() <= row["delta_nats"].get<double>());
  }
}

TEST_CASE("theorem1 check holds with wide margins at reduced scale") {
  ExperimentConfig config;
  config.kind = ExperimentKind::theorem1_check;
  config.noise_grid = {0.5, 1.0};
  config.block_ladder = {1, 2, 4};
  config.sample_count = 20000;
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 0);
  for (const auto& row : result.summary["rows"]) {
    REQUIRE(row["kl_per_n_nats"].get<double>() <= row["bound_nats"].get<double>());
    REQUIRE(row["margin_se"].get<double>() >= 5.0);
  }
}

TEST_CASE("sandwich holds for the gaussian ar1 model at reduced scale") {
  ExperimentConfig config;
  config.kind = ExperimentKind::sandwich;
  config.model = ProcessModel::gaussian(AutocovarianceSpec::ar1(1.0, 0.5));
  config.block_ladder = {1, 2, 4};
  config.sample_count = 20000;
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 0);
  for (const auto& row : result.summary["rows"]) {
    REQUIRE(row["estimate_nats"].get<double>() <=
            row["upper_n_nats"].get<double>() + 3.0 * row["std_error_nats"].get<double>());
    REQUIRE(row["estimate_nats"].get<double>() >= row["lower_nats"].get<double>() - 0.06);
  }
}

TEST_CASE("sandwich holds for every corpus process at reduced scale") {
  for (const auto& process : built_in_processes()) {
    INFO(process.name);
    ExperimentConfig config;
    config.kind = ExperimentKind::sandwich;
    config.model = process.model;
    config.block_ladder = {1, 2, 4};
    config.sample_count = 20000;
    config.seed = 31;
    const auto result = run_experiment(config);
    REQUIRE(result.exit_code == 0);
  }
}

TEST_CASE("experiment reruns are bitwise identical") {
  ExperimentConfig config;
  config.kind = ExperimentKind::theorem1_check;
  config.noise_grid = {1.0};
  config.block_ladder = {2};
  config.sample_count = 5000;
  const auto a = run_experiment(config);
  const auto b = run_experiment(config);
  REQUIRE(a.csv == b.csv);
  REQUIRE(a.summary.dump() == b.summary.dump());
}

TEST_CASE("bits output rescales entropy columns at serialization only") {
  ExperimentConfig nats;
  nats.kind = ExperimentKind::six_nats_sweep;
  nats.grid_size = 64;
  nats.noise_grid = {10.0};
  ExperimentConfig bits = nats;
  bits.unit = "bits";
  const auto in_nats = run_experiment(nats);
  const auto in_bits = run_experiment(bits);
  // the JSON rows stay in nats (single internal unit); csv rescales
  REQUIRE(in_nats.summary["rows"][0]["gap_nats"] == in_bits.summary["rows"][0]["gap_nats"]);
  std::istringstream nats_csv(in_nats.csv), bits_csv(in_bits.csv);
  std::string line;
  std::getline(nats_csv, line);  // comment
  std::getline(nats_csv, line);  // header
  std::getline(nats_csv, line);
  const double nats_gap = std::stod(line.substr(line.rfind(',') + 1));
  std::getline(bits_csv, line);
  std::getline(bits_csv, line);
  std::getline(bits_csv, line);
  const double bits_gap = std::stod(line.substr(line.rfind(',') + 1));
  REQUIRE(bits_gap == Catch::Approx(nats_gap / kLn2).epsilon(1e-12));
}

TEST_CASE("result files land in the output directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "erb_test_out";
  fs::remove_all(dir);
  ExperimentConfig config;
  config.kind = ExperimentKind::six_nats_sweep;
  config.grid_size = 64;
  config.out_dir = dir.string();
  const auto result = run_experiment(config);
  write_result_files(config, result);
  REQUIRE(fs::exists(dir / "six_nats_sweep.csv"));
  REQUIRE(fs::exists(dir / "six_nats_sweep_summary.json"));
  std::ifstream summary(dir / "six_nats_sweep_summary.json");
  json replay;
  summary >> replay;
  REQUIRE(replay["format_version"].get<int>() == kRunRecordFormatVersion);
  // a stored run record replays: the parser accepts the nested config
  std::vector<std::string> errors;
  const auto replayed = config_from_json(replay, &errors);
  REQUIRE(errors.empty());
  const auto rerun = run_experiment(replayed);
  REQUIRE(rerun.csv == result.csv);
  fs::remove_all(dir);
}

TEST_CASE("estimates and probe reports serialize to their records") {
  EstimateWithError e;
  e.value = 1.25;
  e.std_error = 0.5;
  e.method = "knn_k4";
  e.seed = 42;
  e.count = 1000;
  REQUIRE(estimate_csv_header() == "value,std_error,method,seed,count");
  REQUIRE(estimate_csv_row(e) == "1.25,0.5,knn_k4,42,1000");
  const json ej = to_json(e);
  REQUIRE(ej["method"] == "knn_k4");
  REQUIRE(ej["count"] == 1000);

  const auto report = verify_regularity(make_standard_gaussian(2),
                                        RegularityConstants::fixed(1.0, 0.0), ProbePlan{50, 0.0, 9});
  const json rj = to_json(report);
  REQUIRE(rj["pass"].get<bool>());
  REQUIRE(rj["probe_count"] == 50);
  REQUIRE(rj["seed"] == 9);
  REQUIRE(rj["argmin_probe"].size() == 2);
}

TEST_CASE("a violated inequality surfaces as exit code 2") {
  // reversing the noise grid makes the gap column increase, which the sweep
  // must flag as a violated monotonicity bound
  ExperimentConfig config;
  config.kind = ExperimentKind::six_nats_sweep;
  config.grid_size = 64;
  config.noise_grid = {100.0, 1.0};
  const auto result = run_experiment(config);
  REQUIRE(result.exit_code == 2);
  REQUIRE_FALSE(result.violations.empty());
  REQUIRE_FALSE(result.summary["pass"].get<bool>());
}

TEST_CASE("corpus listing names the certified entries") {
  const std::string listing = list_corpus_text();
  REQUIRE(listing.find("logistic") != std::string::npos);
  REQUIRE(listing.find("c2 = 1") != std::string::npos);
  REQUIRE(listing.find("gaussian_ar1") != std::string::npos);
  REQUIRE(listing.find("c1 = 3") != std::string::npos);
  REQUIRE(list_corpus_text(true).empty());
}
