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

#include "coppo/rollout.hpp"

#include <stdexcept>

namespace coppo {

RolloutWorkers::RolloutWorkers(const Environment& proto, int n_workers, std::uint64_t seed) {
  if (n_workers < 1) throw std::invalid_argument("RolloutWorkers: need at least one worker");
  workers_.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) {
    workers_.push_back({proto.clone(), make_rng(seed, 0x9000 + w), true});
  }
}

TrajectoryBatch RolloutWorkers::collect(const PolicySnapshot& snapshot, int steps,
                                        long t_start, const EpsilonSchedule& epsilon) {
  const int n_agents = snapshot.n_agents();
  TrajectoryBatch batch;
  batch.n_agents = n_agents;
  batch.n_actions = snapshot.agent(0).n_actions();
  const int total = steps * n_workers();
  batch.observations.reserve(total);
  batch.actions.reserve(total);
  batch.rewards.resize(total);
  batch.states.reserve(total);
  batch.next_states.reserve(total);
  batch.old_log_probs.resize(total, n_agents);
  batch.terminal.reserve(total);
  batch.worker.reserve(total);
  batch.timestep.reserve(total);
  batch.behavior_epsilon.reserve(total);

  int row = 0;
  for (int w = 0; w < n_workers(); ++w) {
    Worker& worker = workers_[w];
    for (int s = 0; s < steps; ++s, ++row) {
      if (worker.needs_reset || worker.env->terminal()) {
        worker.env->reset(worker.rng);
        worker.needs_reset = false;
      }
      const long t = t_start + s;
      const double eps = epsilon.at(t);
      std::vector<int> obs = worker.env->observations();
      std::vector<int> actions(n_agents);
      for (int i = 0; i < n_agents; ++i) {
        actions[i] = snapshot.agent(i).sample_action(obs[i], worker.rng, eps);
        batch.old_log_probs(row, i) = snapshot.agent(i).log_prob(obs[i], actions[i]);
      }
      Transition tr = worker.env->step(actions, worker.rng);
      batch.observations.push_back(std::move(obs));
      batch.actions.push_back(std::move(actions));
      batch.rewards[row] = tr.reward;
      batch.states.push_back(tr.state);
      batch.next_states.push_back(tr.next_state);
      batch.terminal.push_back(tr.terminal ? 1 : 0);
      batch.worker.push_back(w);
      batch.timestep.push_back(t);
      batch.behavior_epsilon.push_back(eps);
    }
  }
  return batch;
}

}  // namespace coppo
