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

#include "coppo/dec_pomdp.hpp"
#include "coppo/policy.hpp"
#include "coppo/types.hpp"

namespace coppo {

// Factored joint policy as dense per-agent tables pi^i(a | obs), one row per
// observation index.
struct JointPolicyTables {
  std::vector<Matrix> probs;

  int n_agents() const { return static_cast<int>(probs.size()); }
};

JointPolicyTables policy_tables(const std::vector<AgentPolicy>& agents);
JointPolicyTables random_policy_tables(Rng& rng, int n_agents, int n_obs, int n_actions);

// pi(joint action | state) = prod_i pi^i(a^i | obs(s, i)), an S x J table.
Matrix joint_action_probs(const TabularDecPomdp& model, const JointPolicyTables& pi);

// Exact evaluation of a joint policy by linear solves. No truncation: V
// solves the Bellman evaluation system and the discounted visitation solves
// its transpose system.
struct ExactEval {
  Vector v;             // S
  Matrix q;             // S x J
  Matrix advantage;     // S x J, Q - V
  Vector visitation;    // unnormalized discounted state visitation
  double performance;   // expected discounted return from the initial dist
  double bellman_residual;  // max-norm defect of V in the evaluation equation
};

ExactEval exact_eval(const TabularDecPomdp& model, const JointPolicyTables& pi);
double exact_performance(const TabularDecPomdp& model, const JointPolicyTables& pi);

// Exact action-value table of the joint policy, for critics that bypass
// learning on enumerable models.
Matrix exact_q_table(const TabularDecPomdp& model, const JointPolicyTables& pi);

// Monte Carlo estimate of the performance: mean discounted return over
// `episodes` rollouts truncated once the tail bound gamma^T R_max / (1-gamma)
// drops below `tail_tol`. Reference oracle for exact_performance.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int horizon = 0;
};
McEstimate mc_performance(const TabularDecPomdp& model, const JointPolicyTables& pi,
                          int episodes, Rng& rng, double tail_tol = 1e-8);

}  // namespace coppo
