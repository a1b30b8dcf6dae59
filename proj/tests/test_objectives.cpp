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

#include "coppo/objectives.hpp"

#include <cmath>
#include <limits>

#include <doctest.h>

#include "coppo/math.hpp"
#include "coppo/trainer.hpp"

namespace coppo {
namespace {

Matrix ratios_of(const std::vector<AgentPolicy>& now, const PolicySnapshot& snapshot,
                 const TrajectoryBatch& batch) {
  Matrix m(batch.size(), batch.n_agents);
  for (int n = 0; n < batch.size(); ++n) {
    m.row(n) = ratio(now, snapshot, batch.observations[n], batch.actions[n]).transpose();
  }
  return m;
}

struct Setup {
  std::vector<AgentPolicy> policies;
  PolicySnapshot snapshot;
  TrajectoryBatch batch;
  AdvantageBundle bundle;
};

// A small penalty-game batch under near-uniform random snapshot policies,
// with exact advantages.
Setup make_setup(std::uint64_t seed, int batch_size = 32, int n_agents = 4,
                 int n_actions = 9) {
  Setup s;
  const MatrixGameSpec spec = penalty_game(n_agents, n_actions);
  MatrixGameEnv env(spec);
  for (int i = 0; i < n_agents; ++i) {
    AgentPolicy policy = AgentPolicy::tabular_softmax(1, n_actions);
    Rng rng = make_rng(seed, 0x200 + i);
    policy.init_params(rng);
    s.policies.push_back(std::move(policy));
  }
  s.snapshot = PolicySnapshot(s.policies);
  RolloutWorkers workers(env, 1, seed);
  s.batch = workers.collect(s.snapshot, batch_size, 0, {0.3, 0.3, 1});
  s.bundle = compute_advantage_bundle(s.batch, spec.rewards.transpose(), s.snapshot);
  return s;
}

void perturb(std::vector<AgentPolicy>& policies, Rng& rng, double scale) {
  for (AgentPolicy& policy : policies) {
    for (Eigen::Index p = 0; p < policy.params().size(); ++p) {
      policy.params()[p] += scale * (2.0 * uniform_double(rng) - 1.0);
    }
  }
}

TEST_CASE("inner clip weight arithmetic") {
  Vector ones = Vector::Ones(4);
  CHECK(inner_clip_weight(ones, 0, 0.1) == 1.0);

  Vector r(3);
  r << 1.25, 1.0, 2.0;  // product over the others of agent 2 is 1.25
  CHECK(inner_clip_weight(r, 2, 0.10) == doctest::Approx(1.10).epsilon(1e-15));
  r << 0.8, 1.0, 2.0;
  CHECK(inner_clip_weight(r, 2, 0.15) == doctest::Approx(0.85).epsilon(1e-15));
  // The empty product of a single agent is 1.
  CHECK(other_ratio_product(Vector::Constant(1, 7.0), 0) == 1.0);
}

TEST_CASE("inner clip weight always lies in its band") {
  Rng rng = make_rng(49);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector r(4);
    for (int j = 0; j < 4; ++j) r[j] = 0.1 + 3.0 * uniform_double(rng);
    const double g = inner_clip_weight(r, trial % 4, 0.1);
    CHECK(g >= 0.9);
    CHECK(g <= 1.1);
  }
}

TEST_CASE("clipped surrogate term arithmetic") {
  CHECK(clipped_surrogate_term(1.5, 1.0, 0.2) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(clipped_surrogate_term(1.5, -1.0, 0.2) == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(clipped_surrogate_term(1.0, 0.7, 0.2) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(clipped_surrogate_term(0.5, 1.0, 0.2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(clipped_surrogate_term(0.5, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-15));
}

TEST_CASE("pessimism: the term never exceeds the unclipped product") {
  Rng rng = make_rng(50);
  for (int trial = 0; trial < 1000; ++trial) {
    const double u = 0.2 + 2.0 * uniform_double(rng);
    const double adv = 10.0 * uniform_double(rng) - 5.0;
    CHECK(clipped_surrogate_term(u, adv, 0.2) <= u * adv + 1e-15);
  }
}

TEST_CASE("step headroom: the admissible ratio band strictly contains 1") {
  Rng rng = make_rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const double e2 = 0.01 + 0.5 * uniform_double(rng);
    const double e1 = e2 + 0.01 + 0.4 * uniform_double(rng);
    CHECK((1.0 - e1) / (1.0 - e2) < 1.0);
    CHECK((1.0 + e1) / (1.0 + e2) > 1.0);
  }
}

TEST_CASE("objective values at the snapshot equal mean advantages") {
  const Setup s = make_setup(60);
  const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
  CHECK((ratios.array() == 1.0).all());

  const ClipConfig clip{0.2, 0.1, 8};
  for (const ObjectiveVariant variant :
       {ObjectiveVariant::kCoppo, ObjectiveVariant::kNoInnerClip,
        ObjectiveVariant::kIndependentRatio, ObjectiveVariant::kClipSeparately}) {
    for (int i = 0; i < 4; ++i) {
      const double value =
          agent_objective_value(variant, s.policies[i], i, s.batch, s.bundle, ratios, clip);
      CHECK(value == doctest::Approx(s.bundle.agent_adv.col(i).mean()).epsilon(1e-10));
    }
  }
  const double joint_value = agent_objective_value(ObjectiveVariant::kJointClip,
                                                   s.policies[0], 0, s.batch, s.bundle,
                                                   ratios, clip);
  CHECK(joint_value == doctest::Approx(s.bundle.joint_adv.mean()).epsilon(1e-10));
}

TEST_CASE("coppo objective example at the snapshot") {
  // Two samples with local advantages 2 and -1: the epoch-0 objective is 0.5.
  Setup s = make_setup(61, 2, 2, 3);
  s.bundle.agent_adv.col(0) << 2.0, -1.0;
  const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
  const double value =
      agent_objective_value(ObjectiveVariant::kCoppo, s.policies[0], 0, s.batch, s.bundle,
                            ratios, ClipConfig{0.2, 0.1, 8});
  CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("clip-separately equals the unclipped form when every ratio is in band") {
  Setup s = make_setup(62);
  Rng rng = make_rng(63);
  perturb(s.policies, rng, 0.002);
  const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
  const ClipConfig clip{0.2, 0.1, 8};
  for (int n = 0; n < s.batch.size(); ++n) {
    for (int i = 0; i < 4; ++i) CHECK(std::abs(ratios(n, i) - 1.0) < 0.1);
  }
  for (int i = 0; i < 4; ++i) {
    const double separately = agent_objective_value(ObjectiveVariant::kClipSeparately,
                                                    s.policies[i], i, s.batch, s.bundle,
                                                    ratios, clip);
    const double raw = agent_objective_value(ObjectiveVariant::kNoInnerClip, s.policies[i],
                                             i, s.batch, s.bundle, ratios, clip);
    CHECK(separately == doctest::Approx(raw).epsilon(1e-12));
  }
}

TEST_CASE("joint objective splits into weighted local objectives when unclipped") {
  Setup s = make_setup(64);
  Rng rng = make_rng(65);
  perturb(s.policies, rng, 0.001);
  const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
  const ClipConfig clip{0.2, 0.1, 8};
  for (int n = 0; n < s.batch.size(); ++n) {
    CHECK(std::abs(ratios.row(n).prod() - 1.0) < 0.2);
  }
  const double joint = agent_objective_value(ObjectiveVariant::kJointClip, s.policies[0], 0,
                                             s.batch, s.bundle, ratios, clip);
  double sum_local = 0.0;
  for (int i = 0; i < 4; ++i) {
    sum_local += s.bundle.weights[i] *
                 agent_objective_value(ObjectiveVariant::kNoInnerClip, s.policies[i], i,
                                       s.batch, s.bundle, ratios, clip);
  }
  CHECK(joint == doctest::Approx(sum_local).epsilon(1e-12));
}

TEST_CASE("analytic and tape gradients agree to machine precision") {
  Rng rng = make_rng(66);
  for (int trial = 0; trial < 10; ++trial) {
    Setup s = make_setup(670 + trial, 16);
    perturb(s.policies, rng, 0.2);
    const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
    const ClipConfig clip{0.2, 0.1, 8};
    for (const ObjectiveVariant variant :
         {ObjectiveVariant::kCoppo, ObjectiveVariant::kJointClip,
          ObjectiveVariant::kNoInnerClip, ObjectiveVariant::kIndependentRatio,
          ObjectiveVariant::kClipSeparately, ObjectiveVariant::kVanillaPg}) {
      const int i = trial % 4;
      const ObjectiveEval analytic = agent_objective(variant, s.policies[i], i, s.batch,
                                                     s.bundle, ratios, clip,
                                                     GradPath::kAnalytic);
      const ObjectiveEval tape = agent_objective(variant, s.policies[i], i, s.batch,
                                                 s.bundle, ratios, clip, GradPath::kTape);
      CHECK(analytic.value == doctest::Approx(tape.value).epsilon(1e-12));
      CHECK((analytic.gradient - tape.gradient).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

// Central differences on the objective as a function of one agent's
// parameters, with the ratio matrix recomputed per probe.
Vector fd_objective_gradient(ObjectiveVariant variant, Setup& s, int agent_i,
                             const ClipConfig& clip, double h) {
  Vector grad(s.policies[agent_i].param_count());
  for (Eigen::Index p = 0; p < grad.size(); ++p) {
    const double saved = s.policies[agent_i].params()[p];
    s.policies[agent_i].params()[p] = saved + h;
    const double up =
        agent_objective_value(variant, s.policies[agent_i], agent_i, s.batch, s.bundle,
                              ratios_of(s.policies, s.snapshot, s.batch), clip);
    s.policies[agent_i].params()[p] = saved - h;
    const double down =
        agent_objective_value(variant, s.policies[agent_i], agent_i, s.batch, s.bundle,
                              ratios_of(s.policies, s.snapshot, s.batch), clip);
    s.policies[agent_i].params()[p] = saved;
    grad[p] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Distance to the nearest clip kink over all samples of one agent's
// objective; finite-difference probes need clearance.
double kink_margin(ObjectiveVariant variant, const Setup& s, int agent_i,
                   const Matrix& ratios, const ClipConfig& cfg) {
  double margin = std::numeric_limits<double>::infinity();
  for (int n = 0; n < s.batch.size(); ++n) {
    const Vector r = ratios.row(n).transpose();
    const double prod = other_ratio_product(r, agent_i);
    double weight = 1.0;
    switch (variant) {
      case ObjectiveVariant::kCoppo:
        margin = std::min(margin, std::abs(prod - (1.0 - cfg.epsilon_inner)));
        margin = std::min(margin, std::abs(prod - (1.0 + cfg.epsilon_inner)));
        weight = inner_clip_weight(r, agent_i, cfg.epsilon_inner);
        break;
      case ObjectiveVariant::kClipSeparately:
        for (Eigen::Index j = 0; j < r.size(); ++j) {
          if (static_cast<int>(j) == agent_i) continue;
          margin = std::min(margin, std::abs(r[j] - (1.0 - cfg.epsilon_inner)));
          margin = std::min(margin, std::abs(r[j] - (1.0 + cfg.epsilon_inner)));
        }
        weight = separately_clipped_weight(r, agent_i, cfg.epsilon_inner);
        break;
      case ObjectiveVariant::kIndependentRatio:
        weight = 1.0;
        break;
      default:
        weight = prod;
    }
    const double u = weight * ratios(n, agent_i);
    margin = std::min(margin, std::abs(u - (1.0 - cfg.epsilon_outer)));
    margin = std::min(margin, std::abs(u - (1.0 + cfg.epsilon_outer)));
  }
  return margin;
}

TEST_CASE("gradients match central finite differences away from clip kinks") {
  const ClipConfig clip{0.2, 0.1, 8};
  const std::vector<ObjectiveVariant> variants{
      ObjectiveVariant::kCoppo,          ObjectiveVariant::kJointClip,
      ObjectiveVariant::kNoInnerClip,    ObjectiveVariant::kIndependentRatio,
      ObjectiveVariant::kClipSeparately, ObjectiveVariant::kVanillaPg};

  Rng rng = make_rng(70);
  int accepted = 0;
  std::uint64_t attempt = 0;
  while (accepted < 100) {
    ++attempt;
    REQUIRE(attempt < 1000);
    Setup s = make_setup(7000 + attempt, 16);
    perturb(s.policies, rng, 0.15);
    const ObjectiveVariant variant = variants[accepted % variants.size()];
    const int agent_i = static_cast<int>(accepted % 4);
    const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
    if (variant != ObjectiveVariant::kVanillaPg &&
        kink_margin(variant, s, agent_i, ratios, clip) < 1e-3) {
      continue;  // resample, the probe would straddle a kink
    }
    const ObjectiveEval eval = agent_objective(variant, s.policies[agent_i], agent_i,
                                               s.batch, s.bundle, ratios, clip);
    const Vector fd = fd_objective_gradient(variant, s, agent_i, clip, 1e-6);
    for (Eigen::Index p = 0; p < fd.size(); ++p) {
      const double rel =
          std::abs(eval.gradient[p] - fd[p]) / std::max(1.0, std::abs(fd[p]));
      CHECK(rel < 1e-5);
    }
    ++accepted;
  }
}

TEST_CASE("zero advantages give zero gradients for every variant") {
  Setup s = make_setup(71, 8);
  s.bundle.agent_adv.setZero();
  s.bundle.joint_adv.setZero();
  const Matrix ratios = ratios_of(s.policies, s.snapshot, s.batch);
  const ClipConfig clip{0.2, 0.1, 8};
  for (const ObjectiveVariant variant :
       {ObjectiveVariant::kCoppo, ObjectiveVariant::kVanillaPg,
        ObjectiveVariant::kIndependentRatio}) {
    const ObjectiveEval eval =
        agent_objective(variant, s.policies[0], 0, s.batch, s.bundle, ratios, clip);
    CHECK(eval.gradient.isZero());
  }
}

TEST_CASE("variant name round trip and clip validation") {
  for (const std::string& name : variant_names()) {
    CHECK(to_string(variant_from_string(name)) == name);
  }
  CHECK(variant_from_string("no-inner-clip") == ObjectiveVariant::kNoInnerClip);
  CHECK_THROWS_AS(variant_from_string("mystery"), std::invalid_argument);

  ClipConfig bad{0.2, 0.3, 8};  // inner above outer
  CHECK_THROWS_AS(bad.validate(ObjectiveVariant::kCoppo), std::invalid_argument);
  CHECK_NOTHROW(bad.validate(ObjectiveVariant::kIndependentRatio));
  ClipConfig zero_epochs{0.2, 0.1, 0};
  CHECK_THROWS_AS(zero_epochs.validate(ObjectiveVariant::kCoppo), std::invalid_argument);
}

}  // namespace
}  // namespace coppo
