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

#include "coppo/verifier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "coppo/math.hpp"

namespace coppo {

namespace {

// E_{a ~ weights, s ~ rho}[A(s, a)] for dense tables.
double expected_advantage(const Vector& visitation, const Matrix& action_probs,
                          const Matrix& advantage) {
  double total = 0.0;
  for (Eigen::Index s = 0; s < visitation.size(); ++s) {
    total += visitation[s] * action_probs.row(s).dot(advantage.row(s));
  }
  return total;
}

}  // namespace

double perf_difference_residual(const TabularDecPomdp& model, const JointPolicyTables& pi,
                                const JointPolicyTables& pi_new) {
  const ExactEval old_eval = exact_eval(model, pi);
  const ExactEval new_eval = exact_eval(model, pi_new);
  const Matrix new_joint = joint_action_probs(model, pi_new);
  const double lhs = new_eval.performance - old_eval.performance;
  const double rhs = expected_advantage(new_eval.visitation, new_joint, old_eval.advantage);
  return std::abs(lhs - rhs);
}

double surrogate(const TabularDecPomdp& model, const JointPolicyTables& pi,
                 const JointPolicyTables& pi_new) {
  const ExactEval old_eval = exact_eval(model, pi);
  const Matrix new_joint = joint_action_probs(model, pi_new);
  return old_eval.performance +
         expected_advantage(old_eval.visitation, new_joint, old_eval.advantage);
}

double first_order_gap(const TabularDecPomdp& model, const std::vector<AgentPolicy>& agents,
                       double fd_step) {
  for (const AgentPolicy& agent : agents) {
    if (agent.arch() != PolicyArch::kTabularSoftmax) {
      throw std::invalid_argument("first_order_gap: requires tabular-softmax policies");
    }
  }
  const JointPolicyTables pi = policy_tables(agents);
  const ExactEval eval = exact_eval(model, pi);
  const Matrix joint = joint_action_probs(model, pi);
  const int J = model.joint_action_count();

  double max_gap = 0.0;
  std::vector<AgentPolicy> perturbed = agents;
  for (int i = 0; i < model.n_agents; ++i) {
    // Analytic gradient of the surrogate in agent i's logits at the old
    // policy: sum_s rho(s) sum_a pi(a|s) A(s,a) dlog pi^i(a^i|o_i) / dtheta.
    const int n_actions = agents[i].n_actions();
    Matrix surr_grad = Matrix::Zero(agents[i].n_obs(), n_actions);
    for (int s = 0; s < model.n_states; ++s) {
      const int obs = model.observation(s, i);
      for (int j = 0; j < J; ++j) {
        const double w = eval.visitation[s] * joint(s, j) * eval.advantage(s, j);
        if (w == 0.0) continue;
        const int taken = model.joint_action(j)[i];
        surr_grad.row(obs) -= w * pi.probs[i].row(obs);
        surr_grad(obs, taken) += w;
      }
    }

    // Central finite differences of the exact performance in the same
    // coordinates.
    for (int o = 0; o < agents[i].n_obs(); ++o) {
      for (int a = 0; a < n_actions; ++a) {
        const Eigen::Index idx = static_cast<Eigen::Index>(o) * n_actions + a;
        const double saved = perturbed[i].params()[idx];
        perturbed[i].params()[idx] = saved + fd_step;
        const double up = exact_performance(model, policy_tables(perturbed));
        perturbed[i].params()[idx] = saved - fd_step;
        const double down = exact_performance(model, policy_tables(perturbed));
        perturbed[i].params()[idx] = saved;
        const double fd = (up - down) / (2.0 * fd_step);
        const double gap = std::abs(surr_grad(o, a) - fd) / std::max(1.0, std::abs(fd));
        max_gap = std::max(max_gap, gap);
      }
    }
  }
  return max_gap;
}

double theorem1_bound(double eps, std::span<const double> alphas, double gamma) {
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("theorem1_bound: gamma in [0,1)");
  double keep = 1.0;
  for (double alpha : alphas) {
    if (alpha < 0.0 || alpha > 1.0) {
      throw std::invalid_argument("theorem1_bound: alpha in [0,1]");
    }
    keep *= 1.0 - alpha;
  }
  return 4.0 * eps * ((1.0 - gamma * keep) / (1.0 - gamma) - 1.0);
}

BoundReport bound_check(const TabularDecPomdp& model, const JointPolicyTables& pi,
                        const JointPolicyTables& pi_new) {
  BoundReport report;
  const ExactEval old_eval = exact_eval(model, pi);
  report.epsilon_max_adv = old_eval.advantage.cwiseAbs().maxCoeff();
  report.alpha.resize(model.n_agents);
  for (int i = 0; i < model.n_agents; ++i) {
    double max_tv = 0.0;
    for (int o = 0; o < pi.probs[i].rows(); ++o) {
      max_tv = std::max(
          max_tv, tv_divergence(pi.probs[i].row(o).transpose().eval(),
                                pi_new.probs[i].row(o).transpose().eval()));
    }
    report.alpha[i] = std::sqrt(0.5 * max_tv);
  }
  report.bound = theorem1_bound(report.epsilon_max_adv, report.alpha, model.gamma);
  const double j_new = exact_performance(model, pi_new);
  report.measured_gap = std::abs(j_new - surrogate(model, pi, pi_new));
  report.slack = report.bound - report.measured_gap;
  return report;
}

VarianceCheck variance_inequality_check(const std::vector<Vector>& old_probs,
                                        const std::vector<Vector>& new_probs) {
  const int n = static_cast<int>(old_probs.size());
  if (static_cast<int>(new_probs.size()) != n || n < 1) {
    throw std::invalid_argument("variance_inequality_check: need matched nonempty lists");
  }
  // Per-agent ratio moments under the old distribution.
  Vector mean(n), second(n);
  for (int j = 0; j < n; ++j) {
    double m = 0.0, m2 = 0.0;
    for (Eigen::Index a = 0; a < old_probs[j].size(); ++a) {
      const double r = new_probs[j][a] / old_probs[j][a];
      m += old_probs[j][a] * r;
      m2 += old_probs[j][a] * r * r;
    }
    mean[j] = m;
    second[j] = m2;
  }

  // Joint enumeration over the action tuples of all listed agents.
  std::vector<int> tuple(n, 0);
  double ex = 0.0, ex2 = 0.0;
  while (true) {
    double p = 1.0, x = 1.0;
    for (int j = 0; j < n; ++j) {
      p *= old_probs[j][tuple[j]];
      x *= new_probs[j][tuple[j]] / old_probs[j][tuple[j]];
    }
    ex += p * x;
    ex2 += p * x * x;
    int k = n - 1;
    for (; k >= 0; --k) {
      if (++tuple[k] < old_probs[k].size()) break;
      tuple[k] = 0;
    }
    if (k < 0) break;
  }

  VarianceCheck check;
  check.lhs = ex2 - ex * ex;
  check.rhs = 1.0;
  for (int j = 0; j < n; ++j) check.rhs *= second[j] - mean[j] * mean[j];
  return check;
}

double decomposition_identity_residual(const Vector& ratios, const Vector& advantages,
                                       const Vector& weights) {
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("decomposition_identity_residual: weights must be >= 0");
  }
  const double prod = ratios.prod();
  const double lhs = prod * weights.dot(advantages);
  double rhs = 0.0;
  for (Eigen::Index i = 0; i < advantages.size(); ++i) {
    rhs += weights[i] * prod * advantages[i];
  }
  return std::abs(lhs - rhs);
}

namespace {

struct BatteryContext {
  std::vector<TabularDecPomdp> fixtures;
  int trials_override = -1;

  int trials(int default_trials) const {
    return trials_override > 0 ? trials_override : default_trials;
  }
};

void check_bellman(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  for (const TabularDecPomdp& fixture : ctx.fixtures) {
    Rng rng = make_rng(11, 1);
    CheckReport report{.check = "bellman", .fixture = fixture.name, .trials = ctx.trials(100)};
    for (int t = 0; t < report.trials; ++t) {
      const auto pi =
          random_policy_tables(rng, fixture.n_agents, fixture.n_obs, fixture.n_actions);
      const double residual = exact_eval(fixture, pi).bellman_residual;
      report.max_residual = std::max(report.max_residual, residual);
      if (residual > 1e-10) ++report.violations;
    }
    out.push_back(std::move(report));
  }
}

void check_perf_difference(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  for (const TabularDecPomdp& fixture : ctx.fixtures) {
    Rng rng = make_rng(12, 2);
    CheckReport report{
        .check = "perf-difference", .fixture = fixture.name, .trials = ctx.trials(100)};
    for (int t = 0; t < report.trials; ++t) {
      const auto pi =
          random_policy_tables(rng, fixture.n_agents, fixture.n_obs, fixture.n_actions);
      const auto pi_new =
          random_policy_tables(rng, fixture.n_agents, fixture.n_obs, fixture.n_actions);
      const double residual = perf_difference_residual(fixture, pi, pi_new);
      report.max_residual = std::max(report.max_residual, residual);
      if (residual > 1e-9) ++report.violations;
    }
    out.push_back(std::move(report));
  }
}

void check_theorem1(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  for (const TabularDecPomdp& fixture : ctx.fixtures) {
    Rng rng = make_rng(13, 3);
    CheckReport report{
        .check = "theorem1-bound", .fixture = fixture.name, .trials = ctx.trials(1000)};
    double max_gap_minus_bound = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < report.trials; ++t) {
      const auto pi =
          random_policy_tables(rng, fixture.n_agents, fixture.n_obs, fixture.n_actions);
      const auto pi_new =
          random_policy_tables(rng, fixture.n_agents, fixture.n_obs, fixture.n_actions);
      const BoundReport bound = bound_check(fixture, pi, pi_new);
      max_gap_minus_bound = std::max(max_gap_minus_bound, -bound.slack);
      if (bound.slack < -1e-9) ++report.violations;
    }
    report.max_residual = std::max(0.0, max_gap_minus_bound);
    out.push_back(std::move(report));
  }
}

void check_first_order(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  for (const TabularDecPomdp& fixture : ctx.fixtures) {
    Rng rng = make_rng(14, 4);
    CheckReport report{
        .check = "first-order", .fixture = fixture.name, .trials = ctx.trials(20)};
    for (int t = 0; t < report.trials; ++t) {
      std::vector<AgentPolicy> agents;
      for (int i = 0; i < fixture.n_agents; ++i) {
        AgentPolicy agent = AgentPolicy::tabular_softmax(fixture.n_obs, fixture.n_actions);
        for (Eigen::Index p = 0; p < agent.params().size(); ++p) {
          agent.params()[p] = 2.0 * uniform_double(rng) - 1.0;
        }
        agents.push_back(std::move(agent));
      }
      const double gap = first_order_gap(fixture, agents, 1e-5);
      report.max_residual = std::max(report.max_residual, gap);
      if (gap >= 1e-4) ++report.violations;
    }
    out.push_back(std::move(report));
  }
}

void check_variance_product(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  Rng rng = make_rng(15, 5);
  CheckReport report{.check = "variance-product", .fixture = "-", .trials = ctx.trials(1000)};
  for (int t = 0; t < report.trials; ++t) {
    const int n_other = 1 + t % 3;  // N-1 in {1, 2, 3}
    const int n_actions = 2 + static_cast<int>(uniform_int(rng, 3));
    std::vector<Vector> old_probs, new_probs;
    for (int j = 0; j < n_other; ++j) {
      old_probs.push_back(random_simplex(rng, n_actions));
      new_probs.push_back(random_simplex(rng, n_actions));
    }
    const VarianceCheck check = variance_inequality_check(old_probs, new_probs);
    report.max_residual = std::max(report.max_residual, check.rhs - check.lhs);
    if (check.lhs < check.rhs - 1e-12) ++report.violations;
  }
  report.max_residual = std::max(0.0, report.max_residual);
  out.push_back(std::move(report));
}

void check_distributivity(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  Rng rng = make_rng(16, 6);
  CheckReport report{.check = "distributivity", .fixture = "-", .trials = ctx.trials(1000)};
  for (int t = 0; t < report.trials; ++t) {
    const int n = 2 + static_cast<int>(uniform_int(rng, 3));
    Vector ratios(n), adv(n), weights(n);
    for (int i = 0; i < n; ++i) {
      ratios[i] = 0.5 + 1.5 * uniform_double(rng);
      adv[i] = 20.0 * uniform_double(rng) - 10.0;
      weights[i] = 2.0 * uniform_double(rng);
    }
    const double residual = decomposition_identity_residual(ratios, adv, weights);
    report.max_residual = std::max(report.max_residual, residual);
    if (residual >= 1e-12) ++report.violations;
  }
  out.push_back(std::move(report));
}

void check_pinsker(const BatteryContext& ctx, std::vector<CheckReport>& out) {
  Rng rng = make_rng(17, 7);
  CheckReport report{.check = "pinsker", .fixture = "-", .trials = ctx.trials(10000)};
  for (int t = 0; t < report.trials; ++t) {
    const int n = 2 + static_cast<int>(uniform_int(rng, 8));
    const Vector p = random_simplex(rng, n);
    const Vector q = random_simplex(rng, n);
    const double tv = tv_divergence(p, q);
    const double kl = kl_divergence(p, q);
    const double residual = tv * tv - 0.5 * kl;
    report.max_residual = std::max(report.max_residual, residual);
    if (residual > 1e-12) ++report.violations;
  }
  report.max_residual = std::max(0.0, report.max_residual);
  out.push_back(std::move(report));
}

}  // namespace

std::vector<CheckReport> run_verification(const std::string& fixture_filter,
                                          int trials_override) {
  BatteryContext ctx;
  ctx.trials_override = trials_override;
  for (TabularDecPomdp& fixture : theory_fixtures()) {
    if (fixture_filter.empty() || fixture.name.find(fixture_filter) != std::string::npos) {
      ctx.fixtures.push_back(std::move(fixture));
    }
  }
  std::vector<CheckReport> reports;
  check_bellman(ctx, reports);
  check_perf_difference(ctx, reports);
  check_theorem1(ctx, reports);
  check_first_order(ctx, reports);
  check_variance_product(ctx, reports);
  check_distributivity(ctx, reports);
  check_pinsker(ctx, reports);
  return reports;
}

}  // namespace coppo
