// erb — entropy-rate bounds workbench.
//
// Subcommands:
//   erb run --config <path> [--seed N] [--out DIR] [--unit nats|bits]
//   erb list-corpus [--empty]
//   erb check
//
// Exit status: 0 success, 1 input error, 2 bound violated beyond tolerance.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "erb/experiments.hpp"

namespace {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string unit;
};

int run_subcommand(const std::string& config_path, const RunOverrides& overrides) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config file '" << config_path << "'\n";
    return 1;
  }
  erb::json parsed;
  try {
    in >> parsed;
  } catch (const erb::json::exception& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
    return 1;
  }

  std::vector<std::string> schema_errors;
  erb::ExperimentConfig config = erb::config_from_json(parsed, &schema_errors);
  if (!schema_errors.empty()) {
    for (const auto& message : schema_errors) std::cerr << "config error: " << message << "\n";
    return 1;
  }
  if (overrides.seed) config.seed = *overrides.seed;
  if (!overrides.out_dir.empty()) config.out_dir = overrides.out_dir;
  if (!overrides.unit.empty()) config.unit = overrides.unit;

  try {
    const auto result = erb::run_experiment(config);
    erb::write_result_files(config, result);
    std::cout << erb::to_string(config.kind) << ": "
              << (result.exit_code == 0 ? "ok" : "BOUND VIOLATED") << ", outputs in '"
              << config.out_dir << "'\n";
    for (const auto& v : result.violations) std::cout << "  " << v << "\n";
    return result.exit_code;
  } catch (const erb::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const erb::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy-rate bounds workbench"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  std::string config_path;
  std::uint64_t seed_value = 0;
  RunOverrides overrides;
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_option = run->add_option("--seed", seed_value, "override the config seed");
  run->add_option("--out", overrides.out_dir, "override the output directory");
  run->add_option("--unit", overrides.unit, "output unit: nats or bits")
      ->check(CLI::IsMember({"nats", "bits"}));

  auto* list = app.add_subcommand("list-corpus", "list built-in densities and process models");
  bool empty_corpus = false;
  list->add_flag("--empty", empty_corpus, "suppress the built-in corpus");

  auto* check = app.add_subcommand("check", "run the full invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // flag misuse is an input error
  }

  if (run->parsed()) {
    if (seed_option->count() > 0) overrides.seed = seed_value;
    return run_subcommand(config_path, overrides);
  }
  if (list->parsed()) {
    std::cout << erb::list_corpus_text(empty_corpus);
    return 0;
  }
  if (check->parsed()) {
    return erb::run_check_suite(std::cout);
  }
  return 1;
}
