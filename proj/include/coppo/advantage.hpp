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

#include <vector>

#include "coppo/matrix_game.hpp"
#include "coppo/optim.hpp"
#include "coppo/types.hpp"

namespace coppo {

// Exact action-value table of a one-step matrix game: Q coincides with the
// reward table, independent of the discount.
Vector exact_q(const MatrixGameSpec& game);

// Counterfactual advantage of agent `i` at a joint action: Q at the taken
// action minus the exact expectation of Q over agent i's own policy with the
// other agents' actions held fixed.
//   q_row    action values over joint actions for the current state
//   probs_i  agent i's action distribution pi^i(.|tau^i)
double counterfactual_advantage(const Vector& q_row, int n_agents, int n_actions,
                                const Vector& probs_i, std::span<const int> joint_action,
                                int agent_i);

// Unit-weight mixing: the joint advantage is the plain sum of the local ones.
double mix_asum(const Vector& advantages);

// State-conditioned non-negative mixing of local advantages. Non-negativity
// is structural: the effective weights are |raw_weights|, so increasing any
// local advantage can never decrease the mix.
struct AdvantageMixer {
  Matrix raw_weights;  // n_states x n_agents
  Vector bias;         // n_states

  static AdvantageMixer unit(int n_states, int n_agents);
  static AdvantageMixer random(int n_states, int n_agents, Rng& rng, double scale = 1.0);

  Vector weights(int state) const { return raw_weights.row(state).cwiseAbs(); }
};

double mix_amix(const Vector& advantages, int state, const AdvantageMixer& mixer);

struct GaeConfig {
  double lambda = 0.90;
  double gamma = 0.99;
  void validate() const;
};

// Generalized advantage estimation over one trajectory segment. `values` has
// one bootstrap entry more than `rewards`. lambda = 0 gives one-step TD
// residuals, lambda = 1 the discounted-return-minus-value estimate.
Vector gae(const Vector& rewards, const Vector& values, double gamma, double lambda);

struct CriticSample {
  int state = 0;
  int joint_action = 0;
  double mc_return = 0.0;
};

// Counterfactual action-value queries: Q over one agent's candidate actions
// with the other agents' actions held fixed.
class QCritic {
 public:
  virtual ~QCritic() = default;
  virtual Vector action_values(int state, std::span<const int> joint_action,
                               int agent) const = 0;
};

// Dense joint-action table; for one-step games the table is the reward table
// and the critic is exact.
class ExactQCritic : public QCritic {
 public:
  ExactQCritic(Matrix table, int n_agents, int n_actions);
  Vector action_values(int state, std::span<const int> joint_action,
                       int agent) const override;
  const Matrix& table() const { return table_; }

 private:
  Matrix table_;
  int n_agents_;
  int n_actions_;
};

// Learned action-value table over (state, joint action), fit by gradient
// steps on the squared error against empirical returns.
class TabularQCritic : public QCritic {
 public:
  TabularQCritic(int n_states, int n_joint_actions, int n_agents, int n_actions,
                 double learning_rate = 5e-4, double rmsprop_alpha = 0.99);

  double value(int state, int joint_action) const { return table_(state, joint_action); }
  const Matrix& table() const { return table_; }
  Vector state_row(int state) const { return table_.row(state).transpose(); }
  Vector action_values(int state, std::span<const int> joint_action,
                       int agent) const override;

  // One optimizer step on the batch; returns the pre-step loss.
  double fit(const std::vector<CriticSample>& batch);

 private:
  Matrix table_;
  int n_agents_;
  int n_actions_;
  Optimizer opt_;
};

// fit_critic is provided as a free-function spelling of TabularQCritic::fit.
double fit_critic(TabularQCritic& critic, const std::vector<CriticSample>& batch);

// One transition viewed by the learned network critic: the global state, the
// full joint action and the empirical return target.
struct CriticView {
  int state = 0;
  std::vector<int> joint_action;
  double target = 0.0;
};

// Centralized counterfactual critic: a tanh MLP mapping (state, agent id,
// other agents' actions) to action values for that agent, so one forward pass
// yields the whole counterfactual row. Fit by squared error of the taken
// action's value against the return target, one view per (sample, agent).
class MlpQCritic : public QCritic {
 public:
  MlpQCritic(int n_states, int n_agents, int n_actions, int hidden_dim = 72,
             double learning_rate = 5e-4, double rmsprop_alpha = 0.99,
             std::uint64_t seed = 0);

  Vector action_values(int state, std::span<const int> joint_action,
                       int agent) const override;

  // One optimizer step over all the views; returns the pre-step loss.
  double fit(std::span<const CriticView> views);

  int param_count() const { return static_cast<int>(params_.size()); }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }

 private:
  int input_dim() const;
  Vector encode(int state, std::span<const int> joint_action, int agent) const;
  // Forward pass for a batch of encoded inputs (one column each).
  void forward(const Matrix& x, Matrix& h1, Matrix& h2, Matrix& out) const;

  int n_states_;
  int n_agents_;
  int n_actions_;
  int hidden_dim_;
  Vector params_;
  Optimizer opt_;
};

}  // namespace coppo
