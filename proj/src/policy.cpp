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

#include "coppo/policy.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "coppo/math.hpp"

namespace coppo {

std::string to_string(PolicyArch arch) {
  return arch == PolicyArch::kTabularSoftmax ? "tabular-softmax" : "mlp-softmax";
}

PolicyArch policy_arch_from_string(const std::string& name) {
  if (name == "tabular-softmax" || name == "tabular") return PolicyArch::kTabularSoftmax;
  if (name == "mlp-softmax" || name == "mlp") return PolicyArch::kMlpSoftmax;
  throw std::invalid_argument("unknown policy architecture: " + name);
}

AgentPolicy::AgentPolicy(PolicyArch arch, int n_obs, int n_actions, int hidden_dim)
    : arch_(arch), n_obs_(n_obs), n_actions_(n_actions), hidden_dim_(hidden_dim) {
  if (n_obs < 1 || n_actions < 1) {
    throw std::invalid_argument("AgentPolicy: dims must be positive");
  }
  int count = 0;
  if (arch == PolicyArch::kTabularSoftmax) {
    count = n_obs * n_actions;
  } else {
    count = hidden_dim * (n_obs + 1) + n_actions * (hidden_dim + 1);
  }
  params_ = Vector::Zero(count);
}

AgentPolicy AgentPolicy::tabular_softmax(int n_obs, int n_actions) {
  return AgentPolicy(PolicyArch::kTabularSoftmax, n_obs, n_actions, 0);
}

AgentPolicy AgentPolicy::mlp_softmax(int n_obs, int n_actions, int hidden_dim) {
  if (hidden_dim < 1) throw std::invalid_argument("AgentPolicy: hidden_dim must be positive");
  return AgentPolicy(PolicyArch::kMlpSoftmax, n_obs, n_actions, hidden_dim);
}

void AgentPolicy::init_params(Rng& rng, double scale) {
  for (Eigen::Index i = 0; i < params_.size(); ++i) {
    params_[i] = scale * (2.0 * uniform_double(rng) - 1.0);
  }
}

Vector AgentPolicy::logits(int obs) const {
  if (obs < 0 || obs >= n_obs_) throw std::out_of_range("logits: observation out of range");
  if (arch_ == PolicyArch::kTabularSoftmax) {
    return params_.segment(static_cast<Eigen::Index>(obs) * n_actions_, n_actions_);
  }
  // One-hot input: W1's column `obs` plus the bias feeds the hidden layer.
  const int w1 = 0;
  const int b1 = hidden_dim_ * n_obs_;
  const int w2 = b1 + hidden_dim_;
  const int b2 = w2 + n_actions_ * hidden_dim_;
  Vector hidden(hidden_dim_);
  for (int h = 0; h < hidden_dim_; ++h) {
    hidden[h] = std::tanh(params_[w1 + h * n_obs_ + obs] + params_[b1 + h]);
  }
  Vector out(n_actions_);
  for (int a = 0; a < n_actions_; ++a) {
    out[a] = params_.segment(w2 + static_cast<Eigen::Index>(a) * hidden_dim_, hidden_dim_)
                 .dot(hidden) +
             params_[b2 + a];
  }
  return out;
}

Vector AgentPolicy::action_probs(int obs) const { return softmax(logits(obs)); }

double AgentPolicy::log_prob(int obs, int action) const {
  if (action < 0 || action >= n_actions_) {
    throw std::out_of_range("log_prob: action out of range");
  }
  return log_softmax(logits(obs))[action];
}

Vector AgentPolicy::log_prob_grad(int obs, int action) const {
  if (arch_ == PolicyArch::kTabularSoftmax) {
    // d log softmax / d logits = onehot(action) - probs, scattered into the
    // observation's logit row.
    Vector grad = Vector::Zero(params_.size());
    const Eigen::Index off = static_cast<Eigen::Index>(obs) * n_actions_;
    grad.segment(off, n_actions_) = -action_probs(obs);
    grad[off + action] += 1.0;
    return grad;
  }
  Tape tape;
  Tape::NodeId params = tape.input(params_);
  Tape::NodeId lp = log_prob_node(tape, params, obs, action);
  return tape.gradient(lp, params);
}

int AgentPolicy::sample_action(int obs, Rng& rng, double epsilon_greedy) const {
  const double explore = uniform_double(rng);
  // Both branches consume exactly one more draw.
  if (explore < epsilon_greedy) return uniform_int(rng, n_actions_);
  return sample_categorical(rng, action_probs(obs));
}

Tape::NodeId AgentPolicy::log_prob_node(Tape& tape, Tape::NodeId params, int obs,
                                        int action) const {
  if (arch_ == PolicyArch::kTabularSoftmax) {
    Tape::NodeId row = tape.segment(params, obs * n_actions_, n_actions_);
    return tape.log_softmax_pick(row, action);
  }
  Vector onehot = Vector::Zero(n_obs_);
  onehot[obs] = 1.0;
  Tape::NodeId x = tape.constant(onehot);
  Tape::NodeId h = tape.tanh(tape.affine(params, 0, hidden_dim_, n_obs_, x));
  Tape::NodeId logits =
      tape.affine(params, hidden_dim_ * (n_obs_ + 1), n_actions_, hidden_dim_, h);
  return tape.log_softmax_pick(logits, action);
}

nlohmann::json AgentPolicy::to_json() const {
  nlohmann::json doc;
  doc["arch"] = to_string(arch_);
  doc["n_obs"] = n_obs_;
  doc["n_actions"] = n_actions_;
  doc["hidden_dim"] = hidden_dim_;
  doc["params"] = std::vector<double>(params_.begin(), params_.end());
  return doc;
}

AgentPolicy AgentPolicy::from_json(const nlohmann::json& doc) {
  PolicyArch arch = policy_arch_from_string(doc.at("arch").get<std::string>());
  AgentPolicy policy(arch, doc.at("n_obs").get<int>(), doc.at("n_actions").get<int>(),
                     doc.value("hidden_dim", 0));
  const auto& params = doc.at("params");
  if (static_cast<int>(params.size()) != policy.param_count()) {
    throw std::invalid_argument("AgentPolicy::from_json: parameter count mismatch");
  }
  for (Eigen::Index i = 0; i < policy.params_.size(); ++i) {
    policy.params_[i] = params[static_cast<std::size_t>(i)].get<double>();
  }
  return policy;
}

Vector ratio(const std::vector<AgentPolicy>& now, const PolicySnapshot& snapshot,
             std::span<const int> observations, std::span<const int> actions) {
  const int n = static_cast<int>(now.size());
  if (snapshot.n_agents() != n || static_cast<int>(observations.size()) != n ||
      static_cast<int>(actions.size()) != n) {
    throw std::invalid_argument("ratio: agent count mismatch");
  }
  Vector r(n);
  for (int i = 0; i < n; ++i) {
    r[i] = std::exp(now[i].log_prob(observations[i], actions[i]) -
                    snapshot.agent(i).log_prob(observations[i], actions[i]));
  }
  return r;
}

}  // namespace coppo
