#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "poco/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Predictive online convex optimization experiment runner"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write per-round CSV traces");
  std::string scenario_name;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::vector<double> epsilons;
  std::string out_path;
  run->add_option("scenario", scenario_name,
                  "regulation | curtailment | synthetic-quadratic (overrides the config file)");
  run->add_option("--config", config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "RNG seed (overrides the config file)");
  run->add_option("--rounds", rounds, "number of rounds T (overrides the config file)");
  run->add_option("--epsilon", epsilons,
                  "forecast error bound, repeatable for a sweep (overrides the config file)");
  run->add_option("--out", out_path, "CSV output path (overrides the config file)");

  CLI11_PARSE(app, argc, argv);

  try {
    poco::ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = poco::load_config(config_path, scenario_name.empty()
                                               ? std::nullopt
                                               : std::optional<std::string>(scenario_name));
    } else if (!scenario_name.empty()) {
      cfg = poco::default_config(poco::scenario_from_string(scenario_name));
    } else {
      std::fprintf(stderr, "error: provide a scenario or --config\n");
      return 1;
    }
    if (seed) cfg.seed = *seed;
    if (rounds) cfg.rounds = *rounds;
    if (!epsilons.empty()) cfg.epsilons = epsilons;
    if (!out_path.empty()) cfg.out_path = out_path;

    const std::vector<poco::RunResult> results = poco::run_experiment(cfg);
    const std::string summary = poco::summarize(results);
    std::fputs(summary.c_str(), stdout);
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
  return 0;
}
