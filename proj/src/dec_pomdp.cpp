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

#include "coppo/dec_pomdp.hpp"

#include <cmath>
#include <stdexcept>

#include "coppo/math.hpp"

namespace coppo {

int TabularDecPomdp::joint_action_count() const {
  int count = 1;
  for (int k = 0; k < n_agents; ++k) count *= n_actions;
  return count;
}

int TabularDecPomdp::joint_index(std::span<const int> joint_action) const {
  if (static_cast<int>(joint_action.size()) != n_agents) {
    throw std::invalid_argument("joint_index: wrong number of agents");
  }
  int index = 0;
  for (int a : joint_action) {
    if (a < 0 || a >= n_actions) {
      throw std::out_of_range("joint_index: action out of range");
    }
    index = index * n_actions + a;
  }
  return index;
}

std::vector<int> TabularDecPomdp::joint_action(int joint) const {
  std::vector<int> a(n_agents);
  for (int k = n_agents - 1; k >= 0; --k) {
    a[k] = joint % n_actions;
    joint /= n_actions;
  }
  return a;
}

void TabularDecPomdp::validate() const {
  const int J = joint_action_count();
  if (n_agents < 1 || n_actions < 1 || n_states < 1) {
    throw std::invalid_argument("TabularDecPomdp: counts must be positive");
  }
  if (gamma < 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("TabularDecPomdp: gamma must lie in [0, 1)");
  }
  if (initial_dist.size() != n_states || transition.rows() != n_states * J ||
      transition.cols() != n_states || reward.rows() != n_states ||
      reward.cols() != J || observation.rows() != n_states ||
      observation.cols() != n_agents) {
    throw std::invalid_argument("TabularDecPomdp: table shape mismatch");
  }
  for (Eigen::Index r = 0; r < transition.rows(); ++r) {
    if (std::abs(transition.row(r).sum() - 1.0) > 1e-12 ||
        (transition.row(r).array() < 0.0).any()) {
      throw std::invalid_argument("TabularDecPomdp: transition row is not a distribution");
    }
  }
  if (std::abs(initial_dist.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("TabularDecPomdp: initial distribution must sum to 1");
  }
  if (!reward.allFinite()) {
    throw std::invalid_argument("TabularDecPomdp: rewards must be finite");
  }
}

namespace {

// Strictly positive random distribution; renormalized after the draw so the
// row sums to 1 exactly up to one final division.
Vector random_row(Rng& rng, int n) { return random_simplex(rng, n); }

TabularDecPomdp random_fixture(const std::string& name, std::uint64_t seed,
                               int n_states, int n_agents, int n_actions,
                               double gamma) {
  Rng rng = make_rng(seed, 0xf1a7);
  TabularDecPomdp m;
  m.name = name;
  m.n_agents = n_agents;
  m.n_actions = n_actions;
  m.n_states = n_states;
  m.n_obs = n_states;  // fully observable: observation index equals the state
  m.gamma = gamma;
  const int J = m.joint_action_count();
  m.initial_dist = random_row(rng, n_states);
  m.transition.resize(n_states * J, n_states);
  m.reward.resize(n_states, J);
  m.observation.resize(n_states, n_agents);
  for (int s = 0; s < n_states; ++s) {
    for (int j = 0; j < J; ++j) {
      m.transition.row(s * J + j) = random_row(rng, n_states).transpose();
      m.reward(s, j) = 2.0 * uniform_double(rng) - 1.0;
    }
    for (int i = 0; i < n_agents; ++i) m.observation(s, i) = s;
  }
  m.validate();
  return m;
}

}  // namespace

TabularDecPomdp chain_fixture(std::uint64_t seed, double gamma) {
  return random_fixture("chain2-" + std::to_string(seed), seed, 2, 2, 2, gamma);
}

TabularDecPomdp ring_fixture(std::uint64_t seed, double gamma) {
  return random_fixture("ring3-" + std::to_string(seed), seed, 3, 2, 3, gamma);
}

TabularDecPomdp triad_fixture(std::uint64_t seed, double gamma) {
  return random_fixture("triad2-" + std::to_string(seed), seed, 2, 3, 2, gamma);
}

TabularDecPomdp single_state_mdp(double reward, double gamma, int n_agents,
                                 int n_actions) {
  TabularDecPomdp m;
  m.name = "single-state";
  m.n_agents = n_agents;
  m.n_actions = n_actions;
  m.n_states = 1;
  m.n_obs = 1;
  m.gamma = gamma;
  const int J = m.joint_action_count();
  m.initial_dist = Vector::Ones(1);
  m.transition = Matrix::Ones(J, 1);
  m.reward = Matrix::Constant(1, J, reward);
  m.observation = IntMatrix::Zero(1, n_agents);
  m.validate();
  return m;
}

std::vector<TabularDecPomdp> theory_fixtures() {
  return {chain_fixture(101, 0.9), chain_fixture(202, 0.95), ring_fixture(303, 0.9),
          triad_fixture(404, 0.9)};
}

}  // namespace coppo
