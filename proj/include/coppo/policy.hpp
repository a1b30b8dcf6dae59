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

#include "coppo/autodiff.hpp"
#include "coppo/types.hpp"

namespace coppo {

enum class PolicyArch { kTabularSoftmax, kMlpSoftmax };

std::string to_string(PolicyArch arch);
PolicyArch policy_arch_from_string(const std::string& name);

// Per-agent stochastic policy over a finite observation space, parameterized
// by a flat vector. Tabular: one logit row per observation. MLP: one tanh
// hidden layer over a one-hot observation encoding, then a logit head.
// Softmax keeps every action probability strictly positive.
class AgentPolicy {
 public:
  static AgentPolicy tabular_softmax(int n_obs, int n_actions);
  static AgentPolicy mlp_softmax(int n_obs, int n_actions, int hidden_dim = 18);

  PolicyArch arch() const { return arch_; }
  int n_obs() const { return n_obs_; }
  int n_actions() const { return n_actions_; }
  int hidden_dim() const { return hidden_dim_; }
  int param_count() const { return static_cast<int>(params_.size()); }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }

  // Uniform(-scale, scale) initialization, so initial policies sit near
  // uniform.
  void init_params(Rng& rng, double scale = 0.05);

  Vector logits(int obs) const;
  Vector action_probs(int obs) const;
  double log_prob(int obs, int action) const;
  // d log pi(action|obs) / d params; analytic for tabular, tape-backed for
  // the MLP.
  Vector log_prob_grad(int obs, int action) const;

  // With probability epsilon_greedy picks a uniformly random action,
  // otherwise samples the softmax. Draws two uniforms per call regardless of
  // epsilon, keeping RNG streams aligned across schedules.
  int sample_action(int obs, Rng& rng, double epsilon_greedy = 0.0) const;

  // Builds the log pi(action|obs) subgraph on a tape whose `params` node
  // holds this policy's parameter vector.
  Tape::NodeId log_prob_node(Tape& tape, Tape::NodeId params, int obs, int action) const;

  nlohmann::json to_json() const;
  static AgentPolicy from_json(const nlohmann::json& doc);

 private:
  AgentPolicy(PolicyArch arch, int n_obs, int n_actions, int hidden_dim);

  PolicyArch arch_;
  int n_obs_;
  int n_actions_;
  int hidden_dim_;  // 0 for tabular
  Vector params_;
};

// Frozen copy of all agents' parameters taken at update start; immutable for
// the duration of one update's optimization epochs.
class PolicySnapshot {
 public:
  PolicySnapshot() = default;
  explicit PolicySnapshot(const std::vector<AgentPolicy>& agents) : agents_(agents) {}

  int n_agents() const { return static_cast<int>(agents_.size()); }
  const AgentPolicy& agent(int i) const { return agents_[i]; }
  const std::vector<AgentPolicy>& agents() const { return agents_; }

 private:
  std::vector<AgentPolicy> agents_;
};

// Per-agent probability ratios pi_now / pi_snapshot for one sample, computed
// in log space. Equal parameters give exactly 1: both sides run the same
// code path, so the log difference is exactly zero.
Vector ratio(const std::vector<AgentPolicy>& now, const PolicySnapshot& snapshot,
             std::span<const int> observations, std::span<const int> actions);

}  // namespace coppo
