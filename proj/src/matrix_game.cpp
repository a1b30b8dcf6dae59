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

#include "coppo/matrix_game.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace coppo {

int MatrixGameSpec::joint_action_count() const {
  int count = 1;
  for (int k = 0; k < n_agents; ++k) count *= n_actions;
  return count;
}

int MatrixGameSpec::joint_index(std::span<const int> joint_action) const {
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

double MatrixGameSpec::reward(std::span<const int> joint_action) const {
  return rewards[joint_index(joint_action)];
}

void MatrixGameSpec::validate() const {
  if (n_agents < 1 || n_actions < 1) {
    throw std::invalid_argument("MatrixGameSpec: agent and action counts must be positive");
  }
  if (rewards.size() != joint_action_count()) {
    throw std::invalid_argument("MatrixGameSpec: reward table size mismatch");
  }
  if (!rewards.allFinite()) {
    throw std::invalid_argument("MatrixGameSpec: rewards must be finite");
  }
}

JointActionClass classify_joint_action(std::span<const int> joint_action) {
  const int n = static_cast<int>(joint_action.size());
  JointActionClass c;
  bool all_match = true;
  for (int k = 1; k < n; ++k) all_match &= joint_action[k] == joint_action[0];
  if (all_match) {
    c.kind = JointActionClass::kAllMatch;
    c.common_action = joint_action[0];
    return c;
  }
  // Exactly one deviator: some action is played by n-1 agents.
  for (int odd = 0; odd < n; ++odd) {
    int common = -1;
    bool rest_match = true;
    for (int k = 0; k < n; ++k) {
      if (k == odd) continue;
      if (common < 0) common = joint_action[k];
      rest_match &= joint_action[k] == common;
    }
    if (rest_match && joint_action[odd] != common) {
      c.kind = JointActionClass::kThreeMatch;
      c.common_action = common;
      c.odd_agent = odd;
      return c;
    }
  }
  return c;
}

namespace {

// Builds the dense reward table by enumerating joint actions in row-major
// order (agent 0 slowest).
MatrixGameSpec build_game(std::string name, int n_agents, int n_actions,
                          const std::function<double(std::span<const int>)>& reward_fn) {
  MatrixGameSpec spec;
  spec.name = std::move(name);
  spec.n_agents = n_agents;
  spec.n_actions = n_actions;
  spec.rewards.resize(spec.joint_action_count());
  std::vector<int> a(n_agents, 0);
  for (int index = 0; index < spec.rewards.size(); ++index) {
    spec.rewards[index] = reward_fn(a);
    for (int k = n_agents - 1; k >= 0; --k) {
      if (++a[k] < n_actions) break;
      a[k] = 0;
    }
  }
  spec.validate();
  return spec;
}

}  // namespace

MatrixGameSpec penalty_game(int n_agents, int n_actions) {
  return build_game("penalty", n_agents, n_actions, [](std::span<const int> a) {
    switch (classify_joint_action(a).kind) {
      case JointActionClass::kAllMatch: return 50.0;
      case JointActionClass::kThreeMatch: return -50.0;
      default: return -40.0;
    }
  });
}

std::vector<MatrixGameSpec> appendix_d_games() {
  std::vector<MatrixGameSpec> games;
  games.push_back(build_game("matching", 4, 9, [](std::span<const int> a) {
    return classify_joint_action(a).kind == JointActionClass::kAllMatch ? 50.0 : -40.0;
  }));
  games.push_back(build_game("matching-high", 4, 9, [](std::span<const int> a) {
    switch (classify_joint_action(a).kind) {
      case JointActionClass::kAllMatch: return 100.0;
      case JointActionClass::kThreeMatch: return -50.0;
      default: return -40.0;
    }
  }));
  games.push_back(build_game("one-optimal", 4, 9, [](std::span<const int> a) {
    for (int k = 0; k < 4; ++k) {
      if (a[k] != k + 1) return -50.0;
    }
    return 50.0;
  }));
  games.push_back(build_game("climbing", 4, 9, [](std::span<const int> a) {
    JointActionClass c = classify_joint_action(a);
    return c.kind == JointActionClass::kAllMatch ? 10.0 * c.common_action : -40.0;
  }));
  games.push_back(build_game("climbing-penalty", 4, 9, [](std::span<const int> a) {
    JointActionClass c = classify_joint_action(a);
    switch (c.kind) {
      case JointActionClass::kAllMatch: return 10.0 * c.common_action;
      case JointActionClass::kThreeMatch: return -50.0;
      default: return -40.0;
    }
  }));
  games.push_back(build_game("climbing-escalating", 4, 9, [](std::span<const int> a) {
    JointActionClass c = classify_joint_action(a);
    switch (c.kind) {
      case JointActionClass::kAllMatch: return 10.0 * c.common_action;
      case JointActionClass::kThreeMatch: return -10.0 * c.common_action;
      default: return -40.0;
    }
  }));
  return games;
}

MatrixGameSpec game_by_name(const std::string& name) {
  if (name == "penalty") return penalty_game();
  for (MatrixGameSpec& game : appendix_d_games()) {
    if (game.name == name) return std::move(game);
  }
  throw std::invalid_argument("unknown game: " + name);
}

std::vector<std::string> game_names() {
  std::vector<std::string> names{"penalty"};
  for (const MatrixGameSpec& game : appendix_d_games()) names.push_back(game.name);
  return names;
}

nlohmann::json to_json(const MatrixGameSpec& spec) {
  nlohmann::json doc;
  doc["n_agents"] = spec.n_agents;
  doc["n_actions"] = spec.n_actions;
  doc["name"] = spec.name;
  doc["rewards"] = std::vector<double>(spec.rewards.begin(), spec.rewards.end());
  return doc;
}

MatrixGameSpec matrix_game_from_json(const nlohmann::json& doc) {
  MatrixGameSpec spec;
  spec.n_agents = doc.at("n_agents").get<int>();
  spec.n_actions = doc.at("n_actions").get<int>();
  spec.name = doc.value("name", "");
  const auto& rewards = doc.at("rewards");
  spec.rewards.resize(static_cast<Eigen::Index>(rewards.size()));
  for (Eigen::Index i = 0; i < spec.rewards.size(); ++i) {
    spec.rewards[i] = rewards[static_cast<std::size_t>(i)].get<double>();
  }
  spec.validate();
  return spec;
}

}  // namespace coppo
