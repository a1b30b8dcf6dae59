// Copyright 2026 The coppo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: seeded experiment runs, the exact-theory
// verification battery, plot-data emission and the game catalog.
//
// Exit codes: 0 success, 1 configuration error, 2 check violation.

#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coppo/experiment.hpp"
#include "coppo/matrix_game.hpp"
#include "coppo/verifier.hpp"

namespace {

int cmd_run(const std::string& config_path, int seeds_override, int workers_override) {
  coppo::ExperimentConfig config;
  try {
    config = coppo::ExperimentConfig::from_file(config_path);
    if (seeds_override > 0) config.seeds = seeds_override;
    if (workers_override > 0) config.workers = workers_override;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  coppo::run_experiment(config);
  std::cout << "results written to " << config.output_dir << '\n';
  return 0;
}

int cmd_verify(const std::string& fixture, int trials) {
  const auto reports = coppo::run_verification(fixture, trials);
  bool violated = false;
  for (const coppo::CheckReport& report : reports) {
    nlohmann::json line{{"check", report.check},
                        {"fixture", report.fixture},
                        {"trials", report.trials},
                        {"max_residual", report.max_residual},
                        {"violations", report.violations}};
    std::cout << line.dump() << '\n';
    violated |= report.violations > 0;
  }
  return violated ? 2 : 0;
}

int cmd_list_games() {
  for (const std::string& name : coppo::game_names()) {
    const coppo::MatrixGameSpec game = coppo::game_by_name(name);
    std::cout << name << ": " << game.n_agents << " agents, " << game.n_actions
              << " actions\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative multi-agent policy optimization"};
  app.require_subcommand(1);

  std::string config_path;
  int seeds_override = 0;
  int workers_override = 0;
  auto* run = app.add_subcommand("run", "run a seeded experiment from a config file");
  run->add_option("--config", config_path, "key = value config file")->required();
  run->add_option("--seeds", seeds_override, "override the seed count");
  run->add_option("--workers", workers_override, "override parallel job count");

  std::string fixture;
  int trials = -1;
  auto* verify = app.add_subcommand("verify", "run the exact-theory checks");
  verify->add_option("--fixture", fixture, "only fixtures whose name contains this");
  verify->add_option("--trials", trials, "override per-check trial counts");

  std::string results_dir;
  auto* emit = app.add_subcommand("emit-plots", "write tidy per-panel CSVs from run logs");
  emit->add_option("results_dir", results_dir, "experiment results directory")->required();

  app.add_subcommand("list-games", "list the built-in matrix games");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seeds_override, workers_override);
    if (verify->parsed()) return cmd_verify(fixture, trials);
    if (emit->parsed()) {
      coppo::emit_plot_data(results_dir);
      std::cout << "plot data written to " << results_dir << "/plots\n";
      return 0;
    }
    return cmd_list_games();
  } catch (const coppo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
