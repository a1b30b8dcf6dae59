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

#pragma once

#include <string>
#include <vector>

#include "coppo/config.hpp"
#include "coppo/metrics.hpp"
#include "coppo/trainer.hpp"

namespace coppo {

inline constexpr const char* kVersion = "coppo 0.1.0";

// One experiment arm: an objective plus its inner clip threshold. Tokens are
// the canonical objective names with an optional threshold suffix, e.g.
// "coppo@0.05"; the token itself is the arm label.
struct VariantArm {
  std::string label;
  ObjectiveVariant variant = ObjectiveVariant::kCoppo;
  double epsilon_inner = 0.10;
};

VariantArm parse_variant_token(const std::string& token, double default_epsilon_inner);

// Desk-scale experiment: a game, a set of arms, seeds, and the shared
// training hyperparameters.
struct ExperimentConfig {
  std::string game = "penalty";
  std::vector<std::string> variants = {"coppo", "independent-ratio", "vanilla-pg"};
  int seeds = 20;
  std::uint64_t base_seed = 1;
  long total_timesteps = 10000;
  int steps_per_rollout = 6;
  int rollout_workers = 1;
  double learning_rate = 5e-4;
  std::string optimizer = "rmsprop";
  double rmsprop_alpha = 0.99;
  double gamma = 0.99;
  int epochs = 8;
  double epsilon_outer = 0.20;
  double epsilon_inner = 0.10;
  double epsilon_greedy_start = 0.9;
  double epsilon_greedy_end = 0.02;
  long epsilon_greedy_anneal = 6000;
  // The experiment default mirrors the training conditions the game results
  // were produced under: a learned width-72 counterfactual network critic.
  // An exact reward-table critic freezes these games at a scattered
  // equilibrium where every counterfactual advantage is exactly zero.
  std::string critic = "mlp";
  int critic_hidden_dim = 72;
  int critic_epochs = 8;
  // Appendix-C.1-style actor; see the critic note above. A tabular actor
  // moves too slowly under the pinned optimizer for within-update ratio
  // dynamics to engage the clip bands at all.
  std::string policy = "mlp-softmax";
  int policy_hidden_dim = 18;
  bool normalize_advantages = false;
  bool sequential_agent_updates = false;
  long reward_window = 100;
  int grad_variance_window = 50;
  int penalty_event_cap = 0;  // 0: truncate to the observed global minimum
  bool log_gradients = true;
  std::string output_dir = "results";
  int workers = 1;  // parallel (arm, seed) jobs

  static ExperimentConfig from_kv(const KeyValueConfig& kv);
  static ExperimentConfig from_file(const std::string& path);
  // Throws ConfigError before any run on an invalid game, variant or count.
  void validate() const;
  nlohmann::json to_json() const;

  // Training configuration of one arm and seed index; vanilla-pg collapses
  // to a single optimization epoch (its objective has no snapshot
  // correction, so extra epochs would reuse stale on-policy gradients).
  TrainConfig train_config(const VariantArm& arm, int seed_index) const;
};

// Runs every (arm, seed) job, writing per-run JSON-lines logs under
// runs/<label>/seed_<k>.jsonl, per-arm aggregate CSVs and a manifest with
// the resolved config. Byte-identical outputs for identical configs.
void run_experiment(const ExperimentConfig& config);

// Rebuilds the tidy per-panel CSVs (variant, seed, x, y) from the run logs
// in a results directory. Missing runs produce a partial bundle plus a
// warning list in the manifest-adjacent warnings.json.
void emit_plot_data(const std::string& results_dir);

}  // namespace coppo
