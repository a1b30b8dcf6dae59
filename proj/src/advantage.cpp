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

#include "coppo/advantage.hpp"

#include <stdexcept>

namespace coppo {

Vector exact_q(const MatrixGameSpec& game) {
  game.validate();
  return game.rewards;
}

double counterfactual_advantage(const Vector& q_row, int n_agents, int n_actions,
                                const Vector& probs_i, std::span<const int> joint_action,
                                int agent_i) {
  if (probs_i.size() != n_actions) {
    throw std::invalid_argument("counterfactual_advantage: policy size mismatch");
  }
  if (agent_i < 0 || agent_i >= n_agents) {
    throw std::out_of_range("counterfactual_advantage: agent index out of range");
  }
  // Row-major joint index with agent 0 slowest; agent i's digit has stride
  // n_actions^(N-1-i).
  int base = 0;
  int stride = 0;
  for (int k = 0; k < n_agents; ++k) {
    base = base * n_actions + joint_action[k];
    stride = k == agent_i ? 1 : stride * n_actions;
  }
  const int taken = joint_action[agent_i];
  const int origin = base - taken * stride;
  double baseline = 0.0;
  for (int a = 0; a < n_actions; ++a) {
    baseline += probs_i[a] * q_row[origin + a * stride];
  }
  return q_row[base] - baseline;
}

double mix_asum(const Vector& advantages) { return advantages.sum(); }

AdvantageMixer AdvantageMixer::unit(int n_states, int n_agents) {
  return {Matrix::Ones(n_states, n_agents), Vector::Zero(n_states)};
}

AdvantageMixer AdvantageMixer::random(int n_states, int n_agents, Rng& rng, double scale) {
  AdvantageMixer mixer;
  mixer.raw_weights.resize(n_states, n_agents);
  mixer.bias.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int i = 0; i < n_agents; ++i) {
      mixer.raw_weights(s, i) = scale * (2.0 * uniform_double(rng) - 1.0);
    }
    mixer.bias[s] = scale * (2.0 * uniform_double(rng) - 1.0);
  }
  return mixer;
}

double mix_amix(const Vector& advantages, int state, const AdvantageMixer& mixer) {
  if (advantages.size() != mixer.raw_weights.cols()) {
    throw std::invalid_argument("mix_amix: agent count mismatch");
  }
  return mixer.weights(state).dot(advantages) + mixer.bias[state];
}

void GaeConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("GaeConfig: lambda in [0,1]");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("GaeConfig: gamma in [0,1)");
}

Vector gae(const Vector& rewards, const Vector& values, double gamma, double lambda) {
  const Eigen::Index T = rewards.size();
  if (values.size() != T + 1) {
    throw std::invalid_argument("gae: values must hold one bootstrap entry more than rewards");
  }
  Vector adv(T);
  double acc = 0.0;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const double delta = rewards[t] + gamma * values[t + 1] - values[t];
    acc = delta + gamma * lambda * acc;
    adv[t] = acc;
  }
  return adv;
}

namespace {

// Q over agent i's candidate actions, read from a dense joint-action table by
// walking agent i's digit stride.
Vector counterfactual_row(const Matrix& table, int state, std::span<const int> joint_action,
                          int agent, int n_agents, int n_actions) {
  int base = 0;
  int stride = 0;
  for (int k = 0; k < n_agents; ++k) {
    base = base * n_actions + joint_action[k];
    stride = k == agent ? 1 : stride * n_actions;
  }
  const int origin = base - joint_action[agent] * stride;
  Vector values(n_actions);
  for (int a = 0; a < n_actions; ++a) values[a] = table(state, origin + a * stride);
  return values;
}

}  // namespace

ExactQCritic::ExactQCritic(Matrix table, int n_agents, int n_actions)
    : table_(std::move(table)), n_agents_(n_agents), n_actions_(n_actions) {}

Vector ExactQCritic::action_values(int state, std::span<const int> joint_action,
                                   int agent) const {
  return counterfactual_row(table_, state, joint_action, agent, n_agents_, n_actions_);
}

TabularQCritic::TabularQCritic(int n_states, int n_joint_actions, int n_agents,
                               int n_actions, double learning_rate, double rmsprop_alpha)
    : table_(Matrix::Zero(n_states, n_joint_actions)),
      n_agents_(n_agents),
      n_actions_(n_actions),
      opt_("rmsprop", learning_rate, rmsprop_alpha) {}

Vector TabularQCritic::action_values(int state, std::span<const int> joint_action,
                                     int agent) const {
  return counterfactual_row(table_, state, joint_action, agent, n_agents_, n_actions_);
}

double TabularQCritic::fit(const std::vector<CriticSample>& batch) {
  if (batch.empty()) throw std::invalid_argument("fit: empty batch");
  Matrix grad = Matrix::Zero(table_.rows(), table_.cols());
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const CriticSample& sample : batch) {
    const double err = table_(sample.state, sample.joint_action) - sample.mc_return;
    loss += err * err * inv;
    grad(sample.state, sample.joint_action) += 2.0 * err * inv;
  }
  Eigen::Map<Vector> params(table_.data(), table_.size());
  Eigen::Map<const Vector> g(grad.data(), grad.size());
  opt_.step(params, g);
  return loss;
}

double fit_critic(TabularQCritic& critic, const std::vector<CriticSample>& batch) {
  return critic.fit(batch);
}

namespace {
using RowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
}  // namespace

MlpQCritic::MlpQCritic(int n_states, int n_agents, int n_actions, int hidden_dim,
                       double learning_rate, double rmsprop_alpha, std::uint64_t seed)
    : n_states_(n_states),
      n_agents_(n_agents),
      n_actions_(n_actions),
      hidden_dim_(hidden_dim),
      opt_("rmsprop", learning_rate, rmsprop_alpha) {
  const int in = input_dim();
  const int count = hidden_dim * (in + 1) + hidden_dim * (hidden_dim + 1) +
                    n_actions * (hidden_dim + 1);
  params_.resize(count);
  Rng rng = make_rng(seed, 0xc517);
  for (Eigen::Index i = 0; i < params_.size(); ++i) {
    params_[i] = 0.05 * (2.0 * uniform_double(rng) - 1.0);
  }
}

int MlpQCritic::input_dim() const {
  return n_states_ + n_agents_ + (n_agents_ - 1) * n_actions_;
}

Vector MlpQCritic::encode(int state, std::span<const int> joint_action, int agent) const {
  Vector x = Vector::Zero(input_dim());
  x[state] = 1.0;
  x[n_states_ + agent] = 1.0;
  int slot = 0;
  for (int j = 0; j < n_agents_; ++j) {
    if (j == agent) continue;
    x[n_states_ + n_agents_ + slot * n_actions_ + joint_action[j]] = 1.0;
    ++slot;
  }
  return x;
}

void MlpQCritic::forward(const Matrix& x, Matrix& h1, Matrix& h2, Matrix& out) const {
  const int in = input_dim();
  const int H = hidden_dim_;
  const double* p = params_.data();
  ConstRowMajorMap w1(p, H, in);
  Eigen::Map<const Vector> b1(p + H * in, H);
  ConstRowMajorMap w2(p + H * (in + 1), H, H);
  Eigen::Map<const Vector> b2(p + H * (in + 1) + H * H, H);
  ConstRowMajorMap w3(p + H * (in + 1) + H * (H + 1), n_actions_, H);
  Eigen::Map<const Vector> b3(p + H * (in + 1) + H * (H + 1) + n_actions_ * H, n_actions_);
  h1 = ((w1 * x).colwise() + b1).array().tanh();
  h2 = ((w2 * h1).colwise() + b2).array().tanh();
  out = (w3 * h2).colwise() + b3;
}

Vector MlpQCritic::action_values(int state, std::span<const int> joint_action,
                                 int agent) const {
  Matrix x = encode(state, joint_action, agent);
  Matrix h1, h2, out;
  forward(x, h1, h2, out);
  return out.col(0);
}

double MlpQCritic::fit(std::span<const CriticView> views) {
  if (views.empty()) throw std::invalid_argument("fit: empty batch");
  const int in = input_dim();
  const int H = hidden_dim_;
  // One column per (view, agent) pair.
  const int cols = static_cast<int>(views.size()) * n_agents_;
  Matrix x(in, cols);
  std::vector<int> taken(cols);
  Vector target(cols);
  int c = 0;
  for (const CriticView& view : views) {
    for (int i = 0; i < n_agents_; ++i, ++c) {
      x.col(c) = encode(view.state, view.joint_action, i);
      taken[c] = view.joint_action[i];
      target[c] = view.target;
    }
  }

  Matrix h1, h2, out;
  forward(x, h1, h2, out);

  // Squared error on the taken action's value only.
  Matrix d_out = Matrix::Zero(n_actions_, cols);
  double loss = 0.0;
  const double inv = 1.0 / cols;
  for (int k = 0; k < cols; ++k) {
    const double err = out(taken[k], k) - target[k];
    loss += err * err * inv;
    d_out(taken[k], k) = 2.0 * err * inv;
  }

  const double* p = params_.data();
  ConstRowMajorMap w2(p + H * (in + 1), H, H);
  ConstRowMajorMap w3(p + H * (in + 1) + H * (H + 1), n_actions_, H);

  Vector grad = Vector::Zero(params_.size());
  double* g = grad.data();
  RowMajorMap g_w1(g, H, in);
  Eigen::Map<Vector> g_b1(g + H * in, H);
  RowMajorMap g_w2(g + H * (in + 1), H, H);
  Eigen::Map<Vector> g_b2(g + H * (in + 1) + H * H, H);
  RowMajorMap g_w3(g + H * (in + 1) + H * (H + 1), n_actions_, H);
  Eigen::Map<Vector> g_b3(g + H * (in + 1) + H * (H + 1) + n_actions_ * H, n_actions_);

  g_w3 = d_out * h2.transpose();
  g_b3 = d_out.rowwise().sum();
  const Matrix d_z2 =
      (w3.transpose() * d_out).array() * (1.0 - h2.array().square());
  g_w2 = d_z2 * h1.transpose();
  g_b2 = d_z2.rowwise().sum();
  const Matrix d_z1 = (w2.transpose() * d_z2).array() * (1.0 - h1.array().square());
  g_w1 = d_z1 * x.transpose();
  g_b1 = d_z1.rowwise().sum();

  opt_.step(params_, grad);
  return loss;
}

}  // namespace coppo
