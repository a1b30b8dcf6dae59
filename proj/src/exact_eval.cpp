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

#include "coppo/exact_eval.hpp"

#include <cmath>
#include <stdexcept>

#include "coppo/math.hpp"

namespace coppo {

JointPolicyTables policy_tables(const std::vector<AgentPolicy>& agents) {
  JointPolicyTables pi;
  pi.probs.reserve(agents.size());
  for (const AgentPolicy& agent : agents) {
    Matrix table(agent.n_obs(), agent.n_actions());
    for (int o = 0; o < agent.n_obs(); ++o) {
      table.row(o) = agent.action_probs(o).transpose();
    }
    pi.probs.push_back(std::move(table));
  }
  return pi;
}

JointPolicyTables random_policy_tables(Rng& rng, int n_agents, int n_obs, int n_actions) {
  JointPolicyTables pi;
  pi.probs.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    Matrix table(n_obs, n_actions);
    for (int o = 0; o < n_obs; ++o) table.row(o) = random_simplex(rng, n_actions).transpose();
    pi.probs.push_back(std::move(table));
  }
  return pi;
}

Matrix joint_action_probs(const TabularDecPomdp& model, const JointPolicyTables& pi) {
  if (pi.n_agents() != model.n_agents) {
    throw std::invalid_argument("joint_action_probs: agent count mismatch");
  }
  const int J = model.joint_action_count();
  Matrix joint(model.n_states, J);
  for (int s = 0; s < model.n_states; ++s) {
    for (int j = 0; j < J; ++j) {
      const std::vector<int> actions = model.joint_action(j);
      double p = 1.0;
      for (int i = 0; i < model.n_agents; ++i) {
        p *= pi.probs[i](model.observation(s, i), actions[i]);
      }
      joint(s, j) = p;
    }
  }
  return joint;
}

namespace {

// State transition matrix and expected reward under the joint policy.
void policy_kernels(const TabularDecPomdp& model, const Matrix& joint, Matrix& p_pi,
                    Vector& r_pi) {
  const int S = model.n_states;
  const int J = model.joint_action_count();
  p_pi = Matrix::Zero(S, S);
  r_pi = Vector::Zero(S);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < J; ++j) {
      p_pi.row(s) += joint(s, j) * model.transition.row(s * J + j);
      r_pi[s] += joint(s, j) * model.reward(s, j);
    }
  }
}

}  // namespace

ExactEval exact_eval(const TabularDecPomdp& model, const JointPolicyTables& pi) {
  const int S = model.n_states;
  const int J = model.joint_action_count();
  const Matrix joint = joint_action_probs(model, pi);
  Matrix p_pi;
  Vector r_pi;
  policy_kernels(model, joint, p_pi, r_pi);

  const Matrix system = Matrix::Identity(S, S) - model.gamma * p_pi;
  ExactEval eval;
  eval.v = system.partialPivLu().solve(r_pi);
  eval.q.resize(S, J);
  for (int s = 0; s < S; ++s) {
    for (int j = 0; j < J; ++j) {
      eval.q(s, j) =
          model.reward(s, j) + model.gamma * model.transition.row(s * J + j).dot(eval.v);
    }
  }
  eval.advantage = eval.q.colwise() - eval.v;
  eval.visitation = system.transpose().partialPivLu().solve(model.initial_dist);
  eval.performance = model.initial_dist.dot(eval.v);
  eval.bellman_residual = (eval.v - (r_pi + model.gamma * p_pi * eval.v))
                              .cwiseAbs()
                              .maxCoeff();
  return eval;
}

double exact_performance(const TabularDecPomdp& model, const JointPolicyTables& pi) {
  return exact_eval(model, pi).performance;
}

Matrix exact_q_table(const TabularDecPomdp& model, const JointPolicyTables& pi) {
  return exact_eval(model, pi).q;
}

McEstimate mc_performance(const TabularDecPomdp& model, const JointPolicyTables& pi,
                          int episodes, Rng& rng, double tail_tol) {
  const double r_max =
      std::max(1e-12, model.reward.cwiseAbs().maxCoeff() / (1.0 - model.gamma));
  int horizon = 1;
  double tail = r_max;
  while (tail * std::pow(model.gamma, horizon) > tail_tol) ++horizon;

  const Matrix joint = joint_action_probs(model, pi);
  const int J = model.joint_action_count();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int e = 0; e < episodes; ++e) {
    int s = sample_categorical(rng, model.initial_dist);
    double ret = 0.0;
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      const int j = sample_categorical(rng, joint.row(s).transpose());
      ret += discount * model.reward(s, j);
      discount *= model.gamma;
      s = sample_categorical(rng, model.transition.row(s * J + j).transpose());
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  McEstimate est;
  est.mean = sum / episodes;
  const double var = std::max(0.0, sum_sq / episodes - est.mean * est.mean);
  est.std_error = std::sqrt(var / episodes);
  est.horizon = horizon;
  return est;
}

}  // namespace coppo
