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

#include <cmath>

#include <doctest.h>

#include "coppo/math.hpp"

namespace coppo {
namespace {

TEST_CASE("exact q of a one-step game is its reward table") {
  const MatrixGameSpec game = penalty_game();
  const Vector q = exact_q(game);
  CHECK(q == game.rewards);
  CHECK(q[game.joint_index(std::vector<int>{4, 4, 4, 4})] == 50.0);

  const MatrixGameSpec climbing = appendix_d_games()[3];
  CHECK(exact_q(climbing)[climbing.joint_index(std::vector<int>{7, 7, 7, 7})] == 70.0);
}

TEST_CASE("counterfactual advantage against a two-action enumeration") {
  // Two agents, two actions. Q depends only on agent 0's action: (1, 0).
  Vector q(4);
  q << 1.0, 1.0, 0.0, 0.0;  // joint index = 2*a0 + a1
  Vector uniform(2);
  uniform << 0.5, 0.5;
  const double adv =
      counterfactual_advantage(q, 2, 2, uniform, std::vector<int>{0, 1}, 0);
  CHECK(adv == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("advantage vanishes when q ignores the agent's action") {
  Rng rng = make_rng(41);
  Vector q(8);  // three agents, two actions each
  for (int j = 0; j < 8; ++j) q[j] = uniform_double(rng);
  // Make q constant in agent 1's digit (stride 2).
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a2 = 0; a2 < 2; ++a2) {
      q[a0 * 4 + 1 * 2 + a2] = q[a0 * 4 + a2];
    }
  }
  const Vector pi = random_simplex(rng, 2);
  const double adv = counterfactual_advantage(q, 3, 2, pi, std::vector<int>{1, 0, 1}, 1);
  CHECK(std::abs(adv) <= 1e-12);
}

TEST_CASE("advantage is centered under the agent's own policy") {
  Rng rng = make_rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_agents = 2 + static_cast<int>(uniform_int(rng, 2));
    const int n_actions = 2 + static_cast<int>(uniform_int(rng, 3));
    int J = 1;
    for (int k = 0; k < n_agents; ++k) J *= n_actions;
    Vector q(J);
    for (int j = 0; j < J; ++j) q[j] = 10.0 * uniform_double(rng) - 5.0;
    const int agent = static_cast<int>(uniform_int(rng, n_agents));
    const Vector pi = random_simplex(rng, n_actions);
    std::vector<int> joint(n_agents);
    for (int k = 0; k < n_agents; ++k) joint[k] = uniform_int(rng, n_actions);

    double expectation = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      joint[agent] = a;
      expectation += pi[a] * counterfactual_advantage(q, n_agents, n_actions, pi, joint, agent);
    }
    CHECK(std::abs(expectation) <= 1e-10);
  }
}

TEST_CASE("asum is plain summation") {
  Vector a(4);
  a << 1.0, -1.0, 0.0, 0.0;
  CHECK(mix_asum(a) == 0.0);
  CHECK(mix_asum(Vector::Zero(4)) == 0.0);
  a << 0.5, 0.25, 0.25, 0.0;
  CHECK(mix_asum(a) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("amix with unit weights and zero bias reduces to asum") {
  Rng rng = make_rng(43);
  const AdvantageMixer mixer = AdvantageMixer::unit(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    Vector a(4);
    for (int i = 0; i < 4; ++i) a[i] = 4.0 * uniform_double(rng) - 2.0;
    CHECK(mix_amix(a, trial % 2, mixer) == doctest::Approx(mix_asum(a)).epsilon(1e-15));
  }
}

TEST_CASE("amix outputs the bias on zero advantages") {
  Rng rng = make_rng(44);
  const AdvantageMixer mixer = AdvantageMixer::random(3, 4, rng);
  for (int s = 0; s < 3; ++s) {
    CHECK(mix_amix(Vector::Zero(4), s, mixer) == mixer.bias[s]);
  }
}

TEST_CASE("amix weights are non-negative and the mix is monotone") {
  Rng rng = make_rng(45);
  for (int trial = 0; trial < 200; ++trial) {
    const AdvantageMixer mixer = AdvantageMixer::random(2, 3, rng);
    const int state = trial % 2;
    CHECK((mixer.weights(state).array() >= 0.0).all());
    Vector a(3);
    for (int i = 0; i < 3; ++i) a[i] = 6.0 * uniform_double(rng) - 3.0;
    const double base = mix_amix(a, state, mixer);
    const int bump = static_cast<int>(uniform_int(rng, 3));
    a[bump] += uniform_double(rng);
    CHECK(mix_amix(a, state, mixer) >= base - 1e-12);
  }
}

TEST_CASE("gae base cases") {
  Vector rewards(3), values(4);
  rewards << 1.0, -2.0, 0.5;
  values << 0.3, -0.1, 0.2, 0.9;
  const double gamma = 0.95;

  SUBCASE("lambda 0 gives one-step residuals") {
    const Vector adv = gae(rewards, values, gamma, 0.0);
    for (int t = 0; t < 3; ++t) {
      const double delta = rewards[t] + gamma * values[t + 1] - values[t];
      CHECK(adv[t] == doctest::Approx(delta).epsilon(1e-15));
    }
  }

  SUBCASE("all zeros in, zeros out") {
    CHECK(gae(Vector::Zero(3), Vector::Zero(4), gamma, 0.9).isZero());
  }
}

TEST_CASE("gae matches the brute-force discounted sum of residuals") {
  Rng rng = make_rng(46);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + static_cast<int>(uniform_int(rng, 12));
    Vector rewards(T), values(T + 1);
    for (int t = 0; t < T; ++t) rewards[t] = 2.0 * uniform_double(rng) - 1.0;
    for (int t = 0; t <= T; ++t) values[t] = 2.0 * uniform_double(rng) - 1.0;
    const double gamma = 0.99, lambda = 0.90;
    const Vector adv = gae(rewards, values, gamma, lambda);
    for (int t = 0; t < T; ++t) {
      double expected = 0.0;
      for (int l = 0; t + l < T; ++l) {
        const double delta =
            rewards[t + l] + gamma * values[t + l + 1] - values[t + l];
        expected += std::pow(gamma * lambda, l) * delta;
      }
      CHECK(adv[t] == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("lambda 1 equals discounted return minus value") {
  Vector rewards(4), values(5);
  rewards << 1.0, 0.5, -0.25, 2.0;
  values << 0.1, 0.2, 0.3, 0.4, 0.5;
  const double gamma = 0.9;
  const Vector adv = gae(rewards, values, gamma, 1.0);
  // Walking backwards, ret holds the bootstrapped discounted return from t.
  double ret = values[4];
  for (int t = 3; t >= 0; --t) {
    ret = rewards[t] + gamma * ret;
    CHECK(adv[t] == doctest::Approx(ret - values[t]).epsilon(1e-12));
  }
}

TEST_CASE("critic fit is a no-op at zero loss and contracts toward a constant target") {
  TabularQCritic critic(1, 4, 2, 2, 0.05);

  SUBCASE("targets equal to outputs give zero loss and unchanged parameters") {
    std::vector<CriticSample> batch{{0, 1, 0.0}, {0, 2, 0.0}};
    const Matrix before = critic.table();
    const double loss = critic.fit(batch);
    CHECK(loss == 0.0);
    CHECK((critic.table() - before).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("loss decreases monotonically toward a constant target") {
    std::vector<CriticSample> batch{{0, 0, 3.0}};
    double prev = critic.fit(batch);
    for (int step = 0; step < 100; ++step) {
      const double loss = critic.fit(batch);
      CHECK(loss <= prev + 1e-12);
      prev = loss;
    }
  }

  SUBCASE("an exact table has zero loss") {
    std::vector<CriticSample> batch{{0, 3, 0.0}};
    CHECK(critic.fit(batch) == 0.0);
  }
}

TEST_CASE("exact critic action values walk the joint table correctly") {
  const MatrixGameSpec game = penalty_game(3, 4);
  const ExactQCritic critic(game.rewards.transpose(), 3, 4);
  Rng rng = make_rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> joint{uniform_int(rng, 4), uniform_int(rng, 4), uniform_int(rng, 4)};
    const int agent = uniform_int(rng, 3);
    const Vector values = critic.action_values(0, joint, agent);
    for (int a = 0; a < 4; ++a) {
      std::vector<int> probe = joint;
      probe[agent] = a;
      CHECK(values[a] == game.reward(probe));
    }
  }
}

TEST_CASE("network critic loss accounting and convergence") {
  MlpQCritic critic(2, 3, 4, 8, 1e-4, 0.99, 48);
  Rng rng = make_rng(48);
  std::vector<CriticView> views;
  for (int n = 0; n < 6; ++n) {
    views.push_back({n % 2,
                     {uniform_int(rng, 4), uniform_int(rng, 4), uniform_int(rng, 4)},
                     4.0 * uniform_double(rng) - 2.0});
  }

  // Squared-error loss at the taken actions, recomputed from scratch.
  const auto loss_at = [&](const Vector& params) {
    MlpQCritic probe = critic;
    probe.params() = params;
    double loss = 0.0;
    for (const CriticView& view : views) {
      for (int i = 0; i < 3; ++i) {
        const Vector q = probe.action_values(view.state, view.joint_action, i);
        const double err = q[view.joint_action[i]] - view.target;
        loss += err * err / (6.0 * 3.0);
      }
    }
    return loss;
  };

  // fit() reports the pre-step loss, and a small step goes downhill.
  const Vector before = critic.params();
  const double reported = critic.fit(views);
  CHECK(reported == doctest::Approx(loss_at(before)).epsilon(1e-10));
  CHECK(loss_at(critic.params()) < reported);

  // Repeated fits drive the error on a constant target toward zero.
  MlpQCritic learner(1, 2, 3, 8, 5e-3, 0.99, 49);
  std::vector<CriticView> constant{{0, {1, 2}, 5.0}};
  double loss = learner.fit(constant);
  for (int step = 0; step < 2000; ++step) loss = learner.fit(constant);
  CHECK(loss < 0.05);
}

TEST_CASE("network critic fit steps downhill in every sensitive coordinate") {
  MlpQCritic critic(1, 2, 3, 4, 1e-3, 0.99, 50);
  Rng rng = make_rng(51);
  for (Eigen::Index p = 0; p < critic.params().size(); ++p) {
    critic.params()[p] = 0.4 * (2.0 * uniform_double(rng) - 1.0);
  }
  const std::vector<CriticView> views{{0, {2, 1}, 1.5}, {0, {0, 1}, -0.5}};

  const auto loss_at = [&views](const MlpQCritic& probe) {
    double loss = 0.0;
    for (const CriticView& view : views) {
      for (int i = 0; i < 2; ++i) {
        const Vector q = probe.action_values(view.state, view.joint_action, i);
        const double err = q[view.joint_action[i]] - view.target;
        loss += err * err / (2.0 * 2.0);
      }
    }
    return loss;
  };

  // With RMSProp the step magnitude is normalized away, but every component
  // must still move against its finite-difference loss slope.
  const Vector before = critic.params();
  critic.fit(views);
  const Vector delta = critic.params() - before;
  int checked = 0;
  MlpQCritic probe = critic;
  for (Eigen::Index p = 0; p < before.size(); ++p) {
    probe.params() = before;
    probe.params()[p] = before[p] + 1e-6;
    const double up = loss_at(probe);
    probe.params()[p] = before[p] - 1e-6;
    const double down = loss_at(probe);
    const double fd = (up - down) / 2e-6;
    if (std::abs(fd) > 1e-4) {
      CHECK(delta[p] * fd < 0.0);
      ++checked;
    }
  }
  CHECK(checked > 20);
}

}  // namespace
}  // namespace coppo
