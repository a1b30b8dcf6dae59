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

#include "coppo/exact_eval.hpp"

namespace coppo {

// |[J(new) - J(old)] - E_{a ~ new, s ~ rho^new}[A^old(s, a)]|, both sides via
// independent linear solves. The identity holds exactly, so the residual is
// numerical noise.
double perf_difference_residual(const TabularDecPomdp& model, const JointPolicyTables& pi,
                                const JointPolicyTables& pi_new);

// First-order performance approximation around `pi`: J(pi) plus the expected
// advantage of `pi_new` under the OLD visitation distribution.
double surrogate(const TabularDecPomdp& model, const JointPolicyTables& pi,
                 const JointPolicyTables& pi_new);

// Gradient of the surrogate in the new-policy parameters, evaluated at the
// old policy, against a central-finite-difference gradient of the exact
// performance. Returns the max componentwise gap scaled by max(1, |fd|).
double first_order_gap(const TabularDecPomdp& model, const std::vector<AgentPolicy>& agents,
                       double fd_step = 1e-5);

// 4 eps [ (1 - gamma prod_i (1 - alpha_i)) / (1 - gamma) - 1 ].
double theorem1_bound(double eps, std::span<const double> alphas, double gamma);

// Certificate that the surrogate error is within the theoretical bound for
// one policy pair. alpha_i = sqrt(max-over-observations TV(pi^i, new^i) / 2).
struct BoundReport {
  double epsilon_max_adv = 0.0;  // max |A^pi| over states and joint actions
  std::vector<double> alpha;     // per agent
  double bound = 0.0;
  double measured_gap = 0.0;  // |J(new) - surrogate|
  double slack = 0.0;         // bound - measured_gap; >= -1e-9 when the bound holds
};

BoundReport bound_check(const TabularDecPomdp& model, const JointPolicyTables& pi,
                        const JointPolicyTables& pi_new);

// Both sides of the ratio-product variance inequality for one observation:
// Var over the joint actions of the listed agents of prod_j r^j, against the
// product of the per-agent variances. Computed by exact enumeration under
// independent per-agent distributions.
struct VarianceCheck {
  double lhs = 0.0;  // Var[prod r^j]
  double rhs = 0.0;  // prod Var[r^j]
};

VarianceCheck variance_inequality_check(const std::vector<Vector>& old_probs,
                                        const std::vector<Vector>& new_probs);

// |(prod r) sum_i c_i a_i - sum_i c_i (prod r) a_i| for one sample; pure
// distributivity with non-negative weights, zero up to roundoff.
double decomposition_identity_residual(const Vector& ratios, const Vector& advantages,
                                       const Vector& weights);

// One verification battery entry, one JSON object per report line on the CLI.
struct CheckReport {
  std::string check;
  std::string fixture;
  int trials = 0;
  double max_residual = 0.0;
  int violations = 0;
};

// Runs every theory check over the fixture battery. `fixture_filter` keeps
// fixtures whose name contains the filter (empty keeps all);
// `trials_override` > 0 replaces each check's default trial count.
std::vector<CheckReport> run_verification(const std::string& fixture_filter = "",
                                          int trials_override = -1);

}  // namespace coppo
