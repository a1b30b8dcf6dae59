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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coppo/advantage.hpp"
#include "coppo/env.hpp"
#include "coppo/objectives.hpp"
#include "coppo/optim.hpp"
#include "coppo/policy.hpp"
#include "coppo/rollout.hpp"

namespace coppo {

struct TrainConfig {
  ObjectiveVariant variant = ObjectiveVariant::kCoppo;
  double learning_rate = 5e-4;
  std::string optimizer = "rmsprop";
  double rmsprop_alpha = 0.99;
  int rollout_workers = 1;    // R
  int steps_per_rollout = 100;  // T; one update consumes R*T samples
  long total_timesteps = 10000;
  double gamma = 0.99;
  std::uint64_t seed = 0;
  ClipConfig clip;
  EpsilonSchedule epsilon_greedy;
  // exact: reward table / policy evaluation; learned: tabular Q regression;
  // mlp: centralized counterfactual network critic.
  std::string critic = "exact";
  int critic_hidden_dim = 72;
  // Regression steps per update for the learned critics, independent of the
  // policy epochs so every objective variant trains its critic equally.
  int critic_epochs = 8;
  PolicyArch policy_arch = PolicyArch::kTabularSoftmax;
  int mlp_hidden_dim = 18;
  // Gauss-Seidel mode: agents step one after another within an epoch, each
  // seeing the previous agents' fresh parameters. Default is the
  // order-independent simultaneous update.
  bool sequential_agent_updates = false;
  bool normalize_advantages = false;

  void validate() const;
};

// Counterfactual advantages of every agent from the snapshot policies plus
// their unit-weight mix, evaluated against a critic's action-value queries.
AdvantageBundle compute_advantage_bundle(const TrajectoryBatch& batch, const QCritic& critic,
                                         const PolicySnapshot& snapshot,
                                         bool normalize = false);
// Same on a dense joint-action Q table (one row per state).
AdvantageBundle compute_advantage_bundle(const TrajectoryBatch& batch, const Matrix& q_table,
                                         const PolicySnapshot& snapshot,
                                         bool normalize = false);

// Everything one update produces, per agent and optimization epoch. The
// modified advantage trace atilde holds (prod_{j != i} r^j_k) * A^i at the
// start of each epoch for every traced sample, so epoch 0 equals A^i exactly.
struct UpdateReport {
  int epochs = 0;
  Matrix objective;  // N x K
  Matrix grad_norm;  // N x K
  std::vector<std::vector<Vector>> gradients;  // [N][K], objective gradients
  // Score-form policy-gradient estimates at the last epoch, the quantity
  // variance diagnostics track.
  std::vector<Vector> score_gradients;  // [N]
  Matrix ratio_prod_mean, ratio_prod_min, ratio_prod_max;  // N x K

  struct Trace {
    int sample = 0;
    Matrix atilde;  // N x K
  };
  std::vector<Trace> traces;
};

// One optimization phase over a collected batch: K epochs, each computing
// every agent's objective gradient at the epoch-start parameters (other
// agents' ratios enter as constants) and stepping the per-agent optimizers.
// Finally the snapshot is advanced to the updated parameters. Deterministic
// given the batch.
UpdateReport update(std::vector<AgentPolicy>& policies, PolicySnapshot& snapshot,
                    const TrajectoryBatch& batch, const AdvantageBundle& bundle,
                    const TrainConfig& config, std::vector<Optimizer>& optimizers,
                    std::span<const int> traced_samples = {});

// Per-update summary retained by a full training run.
struct UpdateRecord {
  int index = 0;
  long t_end = 0;  // environment steps consumed through this update
  double mean_batch_reward = 0.0;
  UpdateReport report;
};

// A traced sample (for matrix games: a miscoordination event) with its
// advantage trace.
struct EventRecord {
  int update_index = 0;
  long timestep = 0;
  std::vector<int> joint_action;
  int common_action = -1;
  int odd_agent = -1;
  Vector agent_adv;  // N
  Matrix atilde;     // N x K
};

struct RunTrace {
  std::vector<UpdateRecord> updates;
  std::vector<EventRecord> events;
  Vector step_rewards;  // one entry per collected environment step
  std::vector<AgentPolicy> final_policies;
};

// Full rollout/update loop to config.total_timesteps. `event_flag` marks
// joint actions whose samples get advantage traces recorded (may be null).
RunTrace train_run(const Environment& proto, const TrainConfig& config,
                   const std::function<bool(std::span<const int>)>& event_flag = {});

}  // namespace coppo
