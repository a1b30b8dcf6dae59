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

#include "coppo/policy.hpp"
#include "coppo/rollout.hpp"
#include "coppo/types.hpp"

namespace coppo {

// Policy-update objectives. All clipped variants share the pessimistic
// min(u A, clip(u, 1-e1, 1+e1) A) form and differ in how the other agents'
// probability ratios enter the weighted ratio u:
//   kCoppo             u = clip(prod_{j!=i} r^j, 1-e2, 1+e2) * r^i, local advantage
//   kJointClip         u = prod_j r^j, joint advantage
//   kNoInnerClip       u = prod_{j!=i} r^j * r^i, local advantage, no inner clip
//   kIndependentRatio  u = r^i, local advantage (multi-agent PPO baseline)
//   kClipSeparately    u = prod_{j!=i} clip(r^j, 1-e2, 1+e2) * r^i
//   kVanillaPg         mean log pi^i(a|tau) * joint advantage, no clipping
enum class ObjectiveVariant {
  kCoppo,
  kJointClip,
  kNoInnerClip,
  kIndependentRatio,
  kClipSeparately,
  kVanillaPg,
};

std::string to_string(ObjectiveVariant variant);
// Accepts the canonical names: coppo, joint-clip, per-agent-no-inner-clip
// (alias no-inner-clip), independent-ratio, clip-separately, vanilla-pg.
// Throws std::invalid_argument for unknown tags.
ObjectiveVariant variant_from_string(const std::string& name);
std::vector<std::string> variant_names();

bool variant_uses_inner_clip(ObjectiveVariant variant);
// True when the objective weights agent i's ratio by the other agents'
// ratio product (in raw or clipped form).
bool variant_reweights_by_others(ObjectiveVariant variant);

struct ClipConfig {
  double epsilon_outer = 0.20;  // outer threshold
  double epsilon_inner = 0.10;  // inner threshold on the other-agent product
  int epochs = 8;               // optimization epochs per update

  // The inner threshold must satisfy 0 < e2 < e1 whenever the variant clips
  // the other-agent product; every variant needs e1 > 0 and epochs >= 1.
  void validate(ObjectiveVariant variant) const;
};

// min(u * adv, clip(u, 1-eps, 1+eps) * adv) for one sample.
double clipped_surrogate_term(double u, double adv, double eps_outer);
// Subderivative of the term in u; zero when the active branch is flat.
double clipped_surrogate_dterm_du(double u, double adv, double eps_outer);

// Product over j != i; the empty product (single agent) is 1.
double other_ratio_product(const Vector& ratios, int agent_i);
// clip(prod_{j != i} r^j, 1 - eps_inner, 1 + eps_inner).
double inner_clip_weight(const Vector& ratios, int agent_i, double eps_inner);
// prod_{j != i} clip(r^j, 1 - eps_inner, 1 + eps_inner).
double separately_clipped_weight(const Vector& ratios, int agent_i, double eps_inner);

// Per-sample advantages for one update, frozen across its epochs. Local
// entries are counterfactual advantages; the joint entry is their
// non-negative-weighted mix.
struct AdvantageBundle {
  Matrix agent_adv;  // B x N
  Vector joint_adv;  // B
  Vector weights;    // N, the mixing weights c^i
};

enum class GradPath {
  kAuto,      // analytic softmax gradients for tabular, tape for the MLP
  kAnalytic,  // coefficient accumulation over (obs, action) cells
  kTape,      // whole objective built on the reverse-mode tape
};

struct ObjectiveEval {
  double value = 0.0;
  Vector gradient;
};

// Batch objective and its gradient for agent i at the given parameters.
// `ratios` holds every agent's epoch-start probability ratios against the
// snapshot; column i must correspond to `policy_i`. Other agents' ratios are
// constants here: no gradient flows through them.
// Throws std::runtime_error if the objective or gradient is not finite.
ObjectiveEval agent_objective(ObjectiveVariant variant, const AgentPolicy& policy_i,
                              int agent_i, const TrajectoryBatch& batch,
                              const AdvantageBundle& bundle, const Matrix& ratios,
                              const ClipConfig& clip, GradPath path = GradPath::kAuto);

// Objective value alone (no gradient), same arithmetic as agent_objective.
double agent_objective_value(ObjectiveVariant variant, const AgentPolicy& policy_i,
                             int agent_i, const TrajectoryBatch& batch,
                             const AdvantageBundle& bundle, const Matrix& ratios,
                             const ClipConfig& clip);

// The variant's policy-gradient estimate in score-function form: the batch
// mean of weight * ratio * advantage * dlog pi, without the outer clip's
// zero regions. This is the estimator whose variance the inner clip bounds;
// it is what gradient-variance diagnostics report.
Vector score_gradient(ObjectiveVariant variant, const AgentPolicy& policy_i, int agent_i,
                      const TrajectoryBatch& batch, const AdvantageBundle& bundle,
                      const Matrix& ratios, const ClipConfig& clip);

}  // namespace coppo
