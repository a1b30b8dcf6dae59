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
#include <sstream>
#include <stdexcept>

#include "coppo/math.hpp"

namespace coppo {

std::string to_string(ObjectiveVariant variant) {
  switch (variant) {
    case ObjectiveVariant::kCoppo: return "coppo";
    case ObjectiveVariant::kJointClip: return "joint-clip";
    case ObjectiveVariant::kNoInnerClip: return "per-agent-no-inner-clip";
    case ObjectiveVariant::kIndependentRatio: return "independent-ratio";
    case ObjectiveVariant::kClipSeparately: return "clip-separately";
    case ObjectiveVariant::kVanillaPg: return "vanilla-pg";
  }
  return "unknown";
}

ObjectiveVariant variant_from_string(const std::string& name) {
  if (name == "coppo") return ObjectiveVariant::kCoppo;
  if (name == "joint-clip") return ObjectiveVariant::kJointClip;
  if (name == "per-agent-no-inner-clip" || name == "no-inner-clip") {
    return ObjectiveVariant::kNoInnerClip;
  }
  if (name == "independent-ratio") return ObjectiveVariant::kIndependentRatio;
  if (name == "clip-separately") return ObjectiveVariant::kClipSeparately;
  if (name == "vanilla-pg") return ObjectiveVariant::kVanillaPg;
  throw std::invalid_argument("unknown objective variant: " + name);
}

std::vector<std::string> variant_names() {
  return {"coppo", "joint-clip", "per-agent-no-inner-clip", "independent-ratio",
          "clip-separately", "vanilla-pg"};
}

bool variant_uses_inner_clip(ObjectiveVariant variant) {
  return variant == ObjectiveVariant::kCoppo || variant == ObjectiveVariant::kClipSeparately;
}

bool variant_reweights_by_others(ObjectiveVariant variant) {
  switch (variant) {
    case ObjectiveVariant::kCoppo:
    case ObjectiveVariant::kJointClip:
    case ObjectiveVariant::kNoInnerClip:
    case ObjectiveVariant::kClipSeparately:
      return true;
    default:
      return false;
  }
}

void ClipConfig::validate(ObjectiveVariant variant) const {
  if (epochs < 1) throw std::invalid_argument("ClipConfig: epochs must be >= 1");
  if (variant == ObjectiveVariant::kVanillaPg) return;
  if (epsilon_outer <= 0.0) throw std::invalid_argument("ClipConfig: epsilon_outer must be > 0");
  if (variant_uses_inner_clip(variant) &&
      (epsilon_inner <= 0.0 || epsilon_inner >= epsilon_outer)) {
    throw std::invalid_argument("ClipConfig: need 0 < epsilon_inner < epsilon_outer");
  }
}

double clipped_surrogate_term(double u, double adv, double eps_outer) {
  const double clipped = clip(u, 1.0 - eps_outer, 1.0 + eps_outer);
  return std::min(u * adv, clipped * adv);
}

double clipped_surrogate_dterm_du(double u, double adv, double eps_outer) {
  const double clipped = clip(u, 1.0 - eps_outer, 1.0 + eps_outer);
  // Unclipped branch active (ties included): derivative adv. Otherwise the
  // clipped branch is active; it is flat in u.
  if (u * adv <= clipped * adv) return adv;
  return 0.0;
}

double other_ratio_product(const Vector& ratios, int agent_i) {
  double prod = 1.0;
  for (Eigen::Index j = 0; j < ratios.size(); ++j) {
    if (j != agent_i) prod *= ratios[j];
  }
  return prod;
}

double inner_clip_weight(const Vector& ratios, int agent_i, double eps_inner) {
  return clip(other_ratio_product(ratios, agent_i), 1.0 - eps_inner, 1.0 + eps_inner);
}

double separately_clipped_weight(const Vector& ratios, int agent_i, double eps_inner) {
  double prod = 1.0;
  for (Eigen::Index j = 0; j < ratios.size(); ++j) {
    if (j != agent_i) prod *= clip(ratios[j], 1.0 - eps_inner, 1.0 + eps_inner);
  }
  return prod;
}

namespace {

// Constant (w.r.t. theta^i) multiplier on r^i and the advantage used by
// each sample's term.
struct SampleTerm {
  double weight = 1.0;
  double adv = 0.0;
};

SampleTerm sample_term(ObjectiveVariant variant, const Vector& sample_ratios, int agent_i,
                       const AdvantageBundle& bundle, int n, const ClipConfig& clip_cfg) {
  SampleTerm st;
  switch (variant) {
    case ObjectiveVariant::kCoppo:
      st.weight = inner_clip_weight(sample_ratios, agent_i, clip_cfg.epsilon_inner);
      st.adv = bundle.agent_adv(n, agent_i);
      break;
    case ObjectiveVariant::kJointClip:
      st.weight = other_ratio_product(sample_ratios, agent_i);
      st.adv = bundle.joint_adv[n];
      break;
    case ObjectiveVariant::kNoInnerClip:
      st.weight = other_ratio_product(sample_ratios, agent_i);
      st.adv = bundle.agent_adv(n, agent_i);
      break;
    case ObjectiveVariant::kIndependentRatio:
      st.weight = 1.0;
      st.adv = bundle.agent_adv(n, agent_i);
      break;
    case ObjectiveVariant::kClipSeparately:
      st.weight = separately_clipped_weight(sample_ratios, agent_i, clip_cfg.epsilon_inner);
      st.adv = bundle.agent_adv(n, agent_i);
      break;
    case ObjectiveVariant::kVanillaPg:
      st.weight = 1.0;
      st.adv = bundle.joint_adv[n];
      break;
  }
  return st;
}

void check_finite(double value, const Vector& grad, ObjectiveVariant variant, int agent_i) {
  if (std::isfinite(value) && grad.allFinite()) return;
  std::ostringstream msg;
  msg << "non-finite objective for agent " << agent_i << " under " << to_string(variant);
  throw std::runtime_error(msg.str());
}

ObjectiveEval eval_analytic(ObjectiveVariant variant, const AgentPolicy& policy_i,
                            int agent_i, const TrajectoryBatch& batch,
                            const AdvantageBundle& bundle, const Matrix& ratios,
                            const ClipConfig& clip_cfg) {
  const int B = batch.size();
  const double inv_b = 1.0 / static_cast<double>(B);
  // Coefficients on d log pi(a|o): identical (obs, action) cells collapse, so
  // the backward pass runs once per visited cell instead of once per sample.
  Matrix coeff = Matrix::Zero(policy_i.n_obs(), policy_i.n_actions());
  double value = 0.0;
  for (int n = 0; n < B; ++n) {
    const SampleTerm st =
        sample_term(variant, ratios.row(n).transpose(), agent_i, bundle, n, clip_cfg);
    const int obs = batch.observations[n][agent_i];
    const int action = batch.actions[n][agent_i];
    if (variant == ObjectiveVariant::kVanillaPg) {
      value += st.adv * policy_i.log_prob(obs, action) * inv_b;
      coeff(obs, action) += st.adv * inv_b;
      continue;
    }
    const double r = ratios(n, agent_i);
    const double u = st.weight * r;
    value += clipped_surrogate_term(u, st.adv, clip_cfg.epsilon_outer) * inv_b;
    // d term / d log pi = d term / du * w * r.
    const double du = clipped_surrogate_dterm_du(u, st.adv, clip_cfg.epsilon_outer);
    coeff(obs, action) += du * st.weight * r * inv_b;
  }

  ObjectiveEval eval;
  eval.value = value;
  eval.gradient = Vector::Zero(policy_i.param_count());
  if (policy_i.arch() == PolicyArch::kTabularSoftmax) {
    // Per observation row o: grad = coeff(o, .) - rowsum(coeff(o, .)) * pi(.|o).
    for (int o = 0; o < policy_i.n_obs(); ++o) {
      if ((coeff.row(o).array() == 0.0).all()) continue;
      const double rowsum = coeff.row(o).sum();
      Eigen::Ref<Vector> row =
          eval.gradient.segment(static_cast<Eigen::Index>(o) * policy_i.n_actions(),
                                policy_i.n_actions());
      row = coeff.row(o).transpose() - rowsum * policy_i.action_probs(o);
    }
  } else {
    for (int o = 0; o < policy_i.n_obs(); ++o) {
      for (int a = 0; a < policy_i.n_actions(); ++a) {
        if (coeff(o, a) != 0.0) {
          eval.gradient += coeff(o, a) * policy_i.log_prob_grad(o, a);
        }
      }
    }
  }
  check_finite(eval.value, eval.gradient, variant, agent_i);
  return eval;
}

ObjectiveEval eval_tape(ObjectiveVariant variant, const AgentPolicy& policy_i, int agent_i,
                        const TrajectoryBatch& batch, const AdvantageBundle& bundle,
                        const Matrix& ratios, const ClipConfig& clip_cfg) {
  const int B = batch.size();
  Tape tape;
  const Tape::NodeId params = tape.input(policy_i.params());
  Tape::NodeId acc = tape.constant(0.0);
  for (int n = 0; n < B; ++n) {
    const SampleTerm st =
        sample_term(variant, ratios.row(n).transpose(), agent_i, bundle, n, clip_cfg);
    const int obs = batch.observations[n][agent_i];
    const int action = batch.actions[n][agent_i];
    const Tape::NodeId lp = policy_i.log_prob_node(tape, params, obs, action);
    Tape::NodeId term;
    if (variant == ObjectiveVariant::kVanillaPg) {
      term = tape.scale(lp, st.adv);
    } else {
      const Tape::NodeId r = tape.exp(tape.add_const(lp, -batch.old_log_probs(n, agent_i)));
      const Tape::NodeId u = tape.scale(r, st.weight);
      const Tape::NodeId unclipped = tape.scale(u, st.adv);
      const Tape::NodeId clipped = tape.scale(
          tape.clip(u, 1.0 - clip_cfg.epsilon_outer, 1.0 + clip_cfg.epsilon_outer), st.adv);
      term = tape.min(unclipped, clipped);
    }
    acc = tape.add(acc, term);
  }
  const Tape::NodeId mean = tape.scale(acc, 1.0 / static_cast<double>(B));
  ObjectiveEval eval;
  eval.value = tape.value(mean);
  eval.gradient = tape.gradient(mean, params);
  check_finite(eval.value, eval.gradient, variant, agent_i);
  return eval;
}

}  // namespace

ObjectiveEval agent_objective(ObjectiveVariant variant, const AgentPolicy& policy_i,
                              int agent_i, const TrajectoryBatch& batch,
                              const AdvantageBundle& bundle, const Matrix& ratios,
                              const ClipConfig& clip_cfg, GradPath path) {
  if (batch.size() == 0) throw std::invalid_argument("agent_objective: empty batch");
  clip_cfg.validate(variant);
  // The coefficient path serves both architectures: per-sample derivative
  // coefficients collapse onto (obs, action) cells, and the per-cell dlog pi
  // comes from the closed softmax form (tabular) or the reverse-mode tape
  // (MLP). The full-tape path remains as an independent cross-check route.
  return path == GradPath::kTape
             ? eval_tape(variant, policy_i, agent_i, batch, bundle, ratios, clip_cfg)
             : eval_analytic(variant, policy_i, agent_i, batch, bundle, ratios, clip_cfg);
}

double agent_objective_value(ObjectiveVariant variant, const AgentPolicy& policy_i,
                             int agent_i, const TrajectoryBatch& batch,
                             const AdvantageBundle& bundle, const Matrix& ratios,
                             const ClipConfig& clip_cfg) {
  const int B = batch.size();
  const double inv_b = 1.0 / static_cast<double>(B);
  double value = 0.0;
  for (int n = 0; n < B; ++n) {
    const SampleTerm st =
        sample_term(variant, ratios.row(n).transpose(), agent_i, bundle, n, clip_cfg);
    if (variant == ObjectiveVariant::kVanillaPg) {
      value += st.adv *
               policy_i.log_prob(batch.observations[n][agent_i], batch.actions[n][agent_i]) *
               inv_b;
    } else {
      const double u = st.weight * ratios(n, agent_i);
      value += clipped_surrogate_term(u, st.adv, clip_cfg.epsilon_outer) * inv_b;
    }
  }
  return value;
}

Vector score_gradient(ObjectiveVariant variant, const AgentPolicy& policy_i, int agent_i,
                      const TrajectoryBatch& batch, const AdvantageBundle& bundle,
                      const Matrix& ratios, const ClipConfig& clip_cfg) {
  const int B = batch.size();
  const double inv_b = 1.0 / static_cast<double>(B);
  Matrix coeff = Matrix::Zero(policy_i.n_obs(), policy_i.n_actions());
  for (int n = 0; n < B; ++n) {
    const SampleTerm st =
        sample_term(variant, ratios.row(n).transpose(), agent_i, bundle, n, clip_cfg);
    const double c = variant == ObjectiveVariant::kVanillaPg
                         ? st.adv
                         : st.weight * ratios(n, agent_i) * st.adv;
    coeff(batch.observations[n][agent_i], batch.actions[n][agent_i]) += c * inv_b;
  }
  Vector grad = Vector::Zero(policy_i.param_count());
  if (policy_i.arch() == PolicyArch::kTabularSoftmax) {
    for (int o = 0; o < policy_i.n_obs(); ++o) {
      if ((coeff.row(o).array() == 0.0).all()) continue;
      const double rowsum = coeff.row(o).sum();
      grad.segment(static_cast<Eigen::Index>(o) * policy_i.n_actions(),
                   policy_i.n_actions()) =
          coeff.row(o).transpose() - rowsum * policy_i.action_probs(o);
    }
  } else {
    for (int o = 0; o < policy_i.n_obs(); ++o) {
      for (int a = 0; a < policy_i.n_actions(); ++a) {
        if (coeff(o, a) != 0.0) grad += coeff(o, a) * policy_i.log_prob_grad(o, a);
      }
    }
  }
  return grad;
}

}  // namespace coppo
