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

#include "coppo/trainer.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "coppo/exact_eval.hpp"
#include "coppo/math.hpp"

namespace coppo {

void TrainConfig::validate() const {
  clip.validate(variant);
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate > 0");
  if (rollout_workers < 1 || steps_per_rollout < 1 || total_timesteps < 1) {
    throw std::invalid_argument("TrainConfig: counts must be positive");
  }
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("TrainConfig: gamma in [0,1)");
  if (critic_epochs < 1) throw std::invalid_argument("TrainConfig: critic_epochs >= 1");
  if (critic != "exact" && critic != "learned" && critic != "mlp") {
    throw std::invalid_argument("TrainConfig: critic must be exact, learned or mlp");
  }
  if (optimizer != "rmsprop" && optimizer != "sgd") {
    throw std::invalid_argument("TrainConfig: unknown optimizer tag");
  }
}

AdvantageBundle compute_advantage_bundle(const TrajectoryBatch& batch, const QCritic& critic,
                                         const PolicySnapshot& snapshot, bool normalize) {
  const int B = batch.size();
  const int N = batch.n_agents;
  AdvantageBundle bundle;
  bundle.agent_adv.resize(B, N);
  bundle.joint_adv.resize(B);
  bundle.weights = Vector::Ones(N);

  // Snapshot action distributions per (agent, observation); the batch only
  // touches a handful of observations.
  std::vector<Matrix> probs(N);
  for (int i = 0; i < N; ++i) {
    const AgentPolicy& agent = snapshot.agent(i);
    probs[i].resize(agent.n_obs(), agent.n_actions());
    for (int o = 0; o < agent.n_obs(); ++o) {
      probs[i].row(o) = agent.action_probs(o).transpose();
    }
  }

  for (int n = 0; n < B; ++n) {
    for (int i = 0; i < N; ++i) {
      const Vector q = critic.action_values(batch.states[n], batch.actions[n], i);
      const Vector pi = probs[i].row(batch.observations[n][i]).transpose();
      bundle.agent_adv(n, i) = q[batch.actions[n][i]] - pi.dot(q);
    }
    bundle.joint_adv[n] = mix_asum(bundle.agent_adv.row(n).transpose());
  }

  if (normalize) {
    for (int i = 0; i < N; ++i) {
      const double mean = bundle.agent_adv.col(i).mean();
      const double sd = std::sqrt(
          (bundle.agent_adv.col(i).array() - mean).square().sum() / std::max(1, B - 1));
      bundle.agent_adv.col(i) = (bundle.agent_adv.col(i).array() - mean) / (sd + 1e-8);
    }
    const double mean = bundle.joint_adv.mean();
    const double sd =
        std::sqrt((bundle.joint_adv.array() - mean).square().sum() / std::max(1, B - 1));
    bundle.joint_adv = (bundle.joint_adv.array() - mean) / (sd + 1e-8);
  }
  return bundle;
}

AdvantageBundle compute_advantage_bundle(const TrajectoryBatch& batch, const Matrix& q_table,
                                         const PolicySnapshot& snapshot, bool normalize) {
  const ExactQCritic critic(q_table, batch.n_agents, batch.n_actions);
  return compute_advantage_bundle(batch, critic, snapshot, normalize);
}

namespace {

// Probability ratios of every agent on every sample at the current
// parameters, against the recorded snapshot log probs. Log-prob tables are
// computed once per agent; identical parameters give exactly 1.
Matrix batch_ratios(const std::vector<AgentPolicy>& policies, const TrajectoryBatch& batch) {
  const int B = batch.size();
  const int N = batch.n_agents;
  Matrix ratios(B, N);
  for (int i = 0; i < N; ++i) {
    const AgentPolicy& agent = policies[i];
    Matrix log_probs(agent.n_obs(), agent.n_actions());
    for (int o = 0; o < agent.n_obs(); ++o) {
      log_probs.row(o) = log_softmax(agent.logits(o)).transpose();
    }
    for (int n = 0; n < B; ++n) {
      const double lp = log_probs(batch.observations[n][i], batch.actions[n][i]);
      ratios(n, i) = std::exp(lp - batch.old_log_probs(n, i));
    }
  }
  return ratios;
}

}  // namespace

UpdateReport update(std::vector<AgentPolicy>& policies, PolicySnapshot& snapshot,
                    const TrajectoryBatch& batch, const AdvantageBundle& bundle,
                    const TrainConfig& config, std::vector<Optimizer>& optimizers,
                    std::span<const int> traced_samples) {
  config.validate();
  const int N = batch.n_agents;
  const int K = config.clip.epochs;
  const int B = batch.size();
  if (static_cast<int>(policies.size()) != N || static_cast<int>(optimizers.size()) != N) {
    throw std::invalid_argument("update: agent count mismatch");
  }
  if (B == 0) throw std::invalid_argument("update: empty batch");

  UpdateReport report;
  report.epochs = K;
  report.objective.resize(N, K);
  report.grad_norm.resize(N, K);
  report.gradients.assign(N, std::vector<Vector>(K));
  report.ratio_prod_mean.resize(N, K);
  report.ratio_prod_min.resize(N, K);
  report.ratio_prod_max.resize(N, K);
  report.traces.reserve(traced_samples.size());
  for (int sample : traced_samples) {
    report.traces.push_back({sample, Matrix::Zero(N, K)});
  }

  for (int k = 0; k < K; ++k) {
    Matrix ratios = batch_ratios(policies, batch);

    // Epoch-start bookkeeping: raw other-agent products and the modified
    // advantages they induce on the traced samples.
    for (int i = 0; i < N; ++i) {
      double mean = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int n = 0; n < B; ++n) {
        const double prod = other_ratio_product(ratios.row(n).transpose(), i);
        mean += prod;
        lo = std::min(lo, prod);
        hi = std::max(hi, prod);
      }
      report.ratio_prod_mean(i, k) = mean / B;
      report.ratio_prod_min(i, k) = lo;
      report.ratio_prod_max(i, k) = hi;
    }
    for (UpdateReport::Trace& trace : report.traces) {
      for (int i = 0; i < N; ++i) {
        trace.atilde(i, k) =
            other_ratio_product(ratios.row(trace.sample).transpose(), i) *
            bundle.agent_adv(trace.sample, i);
      }
    }

    if (k == K - 1) {
      report.score_gradients.reserve(N);
      for (int i = 0; i < N; ++i) {
        report.score_gradients.push_back(
            score_gradient(config.variant, policies[i], i, batch, bundle, ratios,
                           config.clip));
      }
    }

    if (config.sequential_agent_updates) {
      for (int i = 0; i < N; ++i) {
        Matrix fresh = batch_ratios(policies, batch);
        ObjectiveEval eval = agent_objective(config.variant, policies[i], i, batch, bundle,
                                             fresh, config.clip);
        report.objective(i, k) = eval.value;
        report.grad_norm(i, k) = eval.gradient.norm();
        report.gradients[i][k] = eval.gradient;
        optimizers[i].ascend(policies[i].params(), eval.gradient);
      }
    } else {
      // Simultaneous update: every gradient is taken at the epoch-start
      // parameters, then all agents step at once; agent order is irrelevant.
      std::vector<Vector> pending(N);
      for (int i = 0; i < N; ++i) {
        ObjectiveEval eval = agent_objective(config.variant, policies[i], i, batch, bundle,
                                             ratios, config.clip);
        report.objective(i, k) = eval.value;
        report.grad_norm(i, k) = eval.gradient.norm();
        report.gradients[i][k] = eval.gradient;
        pending[i] = std::move(eval.gradient);
      }
      for (int i = 0; i < N; ++i) optimizers[i].ascend(policies[i].params(), pending[i]);
    }
  }

  snapshot = PolicySnapshot(policies);
  return report;
}

RunTrace train_run(const Environment& proto, const TrainConfig& config,
                   const std::function<bool(std::span<const int>)>& event_flag) {
  config.validate();
  const int N = proto.n_agents();
  const int n_actions = proto.n_actions();
  const int n_obs = proto.n_obs();
  const int J = [&] {
    int j = 1;
    for (int k = 0; k < N; ++k) j *= n_actions;
    return j;
  }();

  std::vector<AgentPolicy> policies;
  std::vector<Optimizer> optimizers;
  for (int i = 0; i < N; ++i) {
    AgentPolicy policy = config.policy_arch == PolicyArch::kTabularSoftmax
                             ? AgentPolicy::tabular_softmax(n_obs, n_actions)
                             : AgentPolicy::mlp_softmax(n_obs, n_actions,
                                                        config.mlp_hidden_dim);
    Rng rng = make_rng(config.seed, 0x100 + i);
    policy.init_params(rng);
    policies.push_back(std::move(policy));
    optimizers.emplace_back(config.optimizer, config.learning_rate, config.rmsprop_alpha);
  }
  PolicySnapshot snapshot(policies);
  RolloutWorkers workers(proto, config.rollout_workers, config.seed);

  // Q sources. The exact critic reads the reward table of a one-step game or
  // evaluates the snapshot policy on an enumerable model; the learned critics
  // regress onto empirical returns, as a dense table or a counterfactual
  // network.
  const auto* matrix_env = dynamic_cast<const MatrixGameEnv*>(&proto);
  const auto* tabular_env = dynamic_cast<const TabularEnv*>(&proto);
  if (config.critic == "exact" && matrix_env == nullptr && tabular_env == nullptr) {
    throw std::invalid_argument("train_run: exact critic needs an enumerable environment");
  }
  std::unique_ptr<TabularQCritic> table_critic;
  std::unique_ptr<MlpQCritic> mlp_critic;
  if (config.critic == "learned") {
    table_critic = std::make_unique<TabularQCritic>(proto.n_states(), J, N, n_actions,
                                                    config.learning_rate,
                                                    config.rmsprop_alpha);
  } else if (config.critic == "mlp") {
    mlp_critic = std::make_unique<MlpQCritic>(proto.n_states(), N, n_actions,
                                              config.critic_hidden_dim,
                                              config.learning_rate, config.rmsprop_alpha,
                                              config.seed);
  }

  // `total_timesteps` counts wall steps: each advances every worker once, so
  // one update consumes steps_per_rollout wall steps and collects
  // rollout_workers times as many samples.
  RunTrace trace;
  trace.step_rewards = Vector::Zero(config.total_timesteps);
  long t = 0;
  int update_index = 0;

  while (t < config.total_timesteps) {
    const int steps = static_cast<int>(
        std::min<long>(config.steps_per_rollout, config.total_timesteps - t));
    TrajectoryBatch batch = workers.collect(snapshot, steps, t, config.epsilon_greedy);

    AdvantageBundle bundle;
    if (config.critic == "exact") {
      const Matrix q_table =
          matrix_env != nullptr
              ? matrix_env->spec().rewards.transpose()
              : exact_q_table(tabular_env->model(), policy_tables(snapshot.agents()));
      bundle = compute_advantage_bundle(batch, q_table, snapshot,
                                        config.normalize_advantages);
    } else {
      // One-step episodes make the reward the exact return; multi-step
      // segments use the within-segment discounted return-to-go.
      std::vector<double> returns(batch.size(), 0.0);
      for (int n = batch.size() - 1; n >= 0; --n) {
        const bool boundary = n + 1 >= batch.size() || batch.terminal[n] ||
                              batch.worker[n + 1] != batch.worker[n];
        returns[n] = batch.rewards[n] + (boundary ? 0.0 : config.gamma * returns[n + 1]);
      }
      if (table_critic != nullptr) {
        std::vector<CriticSample> samples;
        samples.reserve(batch.size());
        for (int n = 0; n < batch.size(); ++n) {
          int joint = 0;
          for (int a : batch.actions[n]) joint = joint * n_actions + a;
          samples.push_back({batch.states[n], joint, returns[n]});
        }
        for (int k = 0; k < config.critic_epochs; ++k) table_critic->fit(samples);
        bundle = compute_advantage_bundle(batch, *table_critic, snapshot,
                                          config.normalize_advantages);
      } else {
        std::vector<CriticView> views;
        views.reserve(batch.size());
        for (int n = 0; n < batch.size(); ++n) {
          views.push_back({batch.states[n], batch.actions[n], returns[n]});
        }
        for (int k = 0; k < config.critic_epochs; ++k) mlp_critic->fit(views);
        bundle = compute_advantage_bundle(batch, *mlp_critic, snapshot,
                                          config.normalize_advantages);
      }
    }

    std::vector<int> traced;
    if (event_flag) {
      for (int n = 0; n < batch.size(); ++n) {
        if (event_flag(batch.actions[n])) traced.push_back(n);
      }
    }

    UpdateRecord record;
    record.index = update_index;
    record.report = update(policies, snapshot, batch, bundle, config, optimizers, traced);
    record.mean_batch_reward = batch.rewards.mean();

    // Reward series indexed by wall step, averaged over workers.
    Vector step_sum = Vector::Zero(steps);
    for (int n = 0; n < batch.size(); ++n) {
      step_sum[batch.timestep[n] - t] += batch.rewards[n];
    }
    trace.step_rewards.segment(t, steps) = step_sum / config.rollout_workers;
    t += steps;
    record.t_end = t;

    for (std::size_t e = 0; e < traced.size(); ++e) {
      EventRecord event;
      event.update_index = update_index;
      event.timestep = batch.timestep[traced[e]];
      event.joint_action = batch.actions[traced[e]];
      const JointActionClass cls = classify_joint_action(event.joint_action);
      event.common_action = cls.common_action;
      event.odd_agent = cls.odd_agent;
      event.agent_adv = bundle.agent_adv.row(traced[e]).transpose();
      event.atilde = record.report.traces[e].atilde;
      trace.events.push_back(std::move(event));
    }

    trace.updates.push_back(std::move(record));
    ++update_index;
  }

  trace.final_policies = std::move(policies);
  return trace;
}

}  // namespace coppo
