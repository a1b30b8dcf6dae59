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
#include <string>
#include <vector>

#include "coppo/types.hpp"

namespace coppo {

// Fully enumerable multi-agent MDP with per-agent observation indices. Small
// enough for exact evaluation by linear solves: every quantity below is a
// dense table over states and joint actions.
struct TabularDecPomdp {
  int n_agents = 0;
  int n_actions = 0;  // per agent
  int n_states = 0;
  int n_obs = 0;  // distinct observation indices across agents
  double gamma = 0.0;
  std::string name;

  Vector initial_dist;  // size S
  // Row (s * J + joint) is the distribution over next states; J = A^N.
  Matrix transition;
  Matrix reward;           // S x J
  IntMatrix observation;  // S x N, observation index of each agent per state

  int joint_action_count() const;
  int joint_index(std::span<const int> joint_action) const;
  // Decodes a joint index back into per-agent actions (row-major inverse).
  std::vector<int> joint_action(int joint) const;

  // Checks stochasticity of every transition row to 1e-12, gamma in [0,1),
  // and consistent table shapes. Throws std::invalid_argument on violation.
  void validate() const;
};

// Two-state, two-agent, two-action chain with strictly positive random
// transition rows and rewards in [-1, 1], reproducible from the seed.
TabularDecPomdp chain_fixture(std::uint64_t seed, double gamma = 0.9);

// Three-state, two-agent, three-action variant of the same construction.
TabularDecPomdp ring_fixture(std::uint64_t seed, double gamma = 0.9);

// Two-state, three-agent, two-action variant.
TabularDecPomdp triad_fixture(std::uint64_t seed, double gamma = 0.9);

// Degenerate single-state model paying `reward` for every joint action.
TabularDecPomdp single_state_mdp(double reward, double gamma, int n_agents = 1,
                                 int n_actions = 2);

// The battery used by exact-theory checks.
std::vector<TabularDecPomdp> theory_fixtures();

}  // namespace coppo
