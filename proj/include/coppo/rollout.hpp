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
#include <memory>
#include <vector>

#include "coppo/env.hpp"
#include "coppo/policy.hpp"
#include "coppo/types.hpp"

namespace coppo {

// Samples gathered under one policy snapshot for one update. Old log
// probabilities are recorded at collection time from the snapshot that chose
// the actions.
struct TrajectoryBatch {
  int n_agents = 0;
  int n_actions = 0;
  std::vector<std::vector<int>> observations;  // B x N
  std::vector<std::vector<int>> actions;       // B x N
  Vector rewards;                              // B
  std::vector<int> states;                     // B, global state for critics
  std::vector<int> next_states;                // B
  Matrix old_log_probs;                        // B x N
  std::vector<char> terminal;                  // B
  std::vector<int> worker;                     // B, originating rollout worker
  std::vector<long> timestep;                  // B, global environment step
  // Exploration rate in effect when each sample was drawn. Ratios are always
  // computed from the pure softmax policies; the behavior mixture is recorded
  // here for reproducibility.
  std::vector<double> behavior_epsilon;

  int size() const { return static_cast<int>(actions.size()); }
};

// Linear annealing from `start` to `end` over `anneal_steps` environment
// steps, constant afterwards.
struct EpsilonSchedule {
  double start = 0.9;
  double end = 0.02;
  long anneal_steps = 6000;

  double at(long t) const {
    if (anneal_steps <= 0 || t >= anneal_steps) return end;
    double f = static_cast<double>(t) / static_cast<double>(anneal_steps);
    return start + f * (end - start);
  }
};

// A fixed set of rollout workers, each owning an isolated environment copy
// and RNG stream. Worker state persists across collect() calls. Batches are
// merged in (worker, step) order, so results do not depend on how workers
// would be scheduled.
class RolloutWorkers {
 public:
  RolloutWorkers(const Environment& proto, int n_workers, std::uint64_t seed);

  // Runs every worker for `steps` environment steps under the snapshot,
  // resetting episodes as they terminate. Global step indices start at
  // `t_start` and advance once per step across all workers.
  TrajectoryBatch collect(const PolicySnapshot& snapshot, int steps, long t_start,
                          const EpsilonSchedule& epsilon);

  int n_workers() const { return static_cast<int>(workers_.size()); }

 private:
  struct Worker {
    std::unique_ptr<Environment> env;
    Rng rng;
    bool needs_reset = true;
  };
  std::vector<Worker> workers_;
};

}  // namespace coppo
