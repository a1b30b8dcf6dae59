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

#include <nlohmann/json_fwd.hpp>

#include "coppo/types.hpp"

namespace coppo {

// One-shot cooperative matrix game: N agents, the same number of actions per
// agent, one shared team reward per joint action. Episodes last one step.
struct MatrixGameSpec {
  int n_agents = 0;
  int n_actions = 0;
  std::string name;
  // Team reward for every joint action, row-major with agent 0 varying
  // slowest: index = sum_k a_k * n_actions^(N-1-k).
  Vector rewards;

  int joint_action_count() const;
  int joint_index(std::span<const int> joint_action) const;
  double reward(std::span<const int> joint_action) const;

  // Throws std::invalid_argument on inconsistent sizes or non-finite rewards.
  void validate() const;
};

// Coordination pattern of a joint action: all agents matching, exactly three
// matching with one deviator, or anything else.
struct JointActionClass {
  enum Kind { kAllMatch, kThreeMatch, kOther } kind = kOther;
  int common_action = -1;  // set for kAllMatch and kThreeMatch
  int odd_agent = -1;      // set for kThreeMatch
};

// Patterns are disjoint: a unanimous joint action is kAllMatch, exactly one
// deviator from an otherwise common action is kThreeMatch, everything else is
// kOther. Works for any agent count; the name reflects the 4-agent games.
JointActionClass classify_joint_action(std::span<const int> joint_action);

// The hard 4-agent, 9-action penalty game: 50 for a unanimous action, -50 when
// exactly three agents coincide and one deviates, -40 otherwise.
MatrixGameSpec penalty_game(int n_agents = 4, int n_actions = 9);

// Six 4-agent 9-action variants covering matching and climbing games of
// graded difficulty:
//   1 "matching"             unanimity 50, everything else -40
//   2 "matching-high"        unanimity 100, three-match -50, else -40
//   3 "one-optimal"          50 only for the single joint action (1,2,3,4)
//   4 "climbing"             unanimity on action i pays i*10, else -40
//   5 "climbing-penalty"     climbing with -50 on a three-match
//   6 "climbing-escalating"  climbing with -i*10 on a three-match on action i
std::vector<MatrixGameSpec> appendix_d_games();

// Lookup by name over penalty_game() plus appendix_d_games().
// Throws std::invalid_argument for unknown names.
MatrixGameSpec game_by_name(const std::string& name);
std::vector<std::string> game_names();

// JSON document {n_agents, n_actions, name, rewards} with the dense reward
// array in row-major joint-action order.
nlohmann::json to_json(const MatrixGameSpec& spec);
MatrixGameSpec matrix_game_from_json(const nlohmann::json& doc);

}  // namespace coppo
