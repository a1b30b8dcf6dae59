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

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coppo/trainer.hpp"
#include "coppo/types.hpp"

namespace coppo {

// On-disk run record, one JSON object per line: a header, one line per
// update, one line per traced event, and the per-step reward series.
struct RunLog {
  std::string variant_label;  // experiment arm, e.g. "coppo@0.05"
  std::string objective;      // canonical objective name
  std::uint64_t seed = 0;
  nlohmann::json config;

  struct Update {
    int index = 0;
    long t_end = 0;
    double mean_reward = 0.0;
    Matrix objective;  // N x K
    Matrix grad_norm;  // N x K
    Matrix ratio_prod_mean, ratio_prod_min, ratio_prod_max;  // N x K
    std::vector<std::vector<Vector>> gradients;              // [N][K], may be empty
  };
  struct Event {
    int update_index = 0;
    long timestep = 0;
    std::vector<int> joint_action;
    int common_action = -1;
    int odd_agent = -1;
    Vector agent_adv;  // N
    Matrix atilde;     // N x K
  };

  std::vector<Update> updates;
  std::vector<Event> events;
  Vector step_rewards;
};

RunLog run_log_from_trace(const std::string& variant_label, const std::string& objective,
                          std::uint64_t seed, const nlohmann::json& config,
                          const RunTrace& trace, bool keep_gradients);
void write_run_log(const std::string& path, const RunLog& log);
RunLog read_run_log(const std::string& path);

// Trailing mean over the last `window` entries at each position (shorter
// prefixes average what exists).
Vector windowed_mean(const Vector& series, long window);

// Post-penalty advantage series: one value per traced event, the mean over
// the matching agents (all but the deviator) of the local advantage. For
// objectives that reweight by other agents' ratios the per-agent value is the
// mean over epochs of the modified advantage atilde; otherwise it is the
// frozen local advantage. `cap` > 0 truncates the series.
std::vector<double> post_penalty_advantage(const RunLog& log, int cap = 0);

// Windowed empirical variance of policy-gradient components: at each update
// u >= window-1, the per-component variance over the gradients of the last
// `window` updates (all epochs), averaged over components and agents.
// Requires gradients in the log.
std::vector<double> running_grad_variance(const RunLog& log, int window);

// One-sided bootstrap estimate of P(mean(a) > mean(b)) under resampling each
// group with replacement.
double bootstrap_superiority(const std::vector<double>& a, const std::vector<double>& b,
                             int resamples, Rng& rng);

// Spearman rank correlation with average ranks on ties.
double spearman_rho(const Vector& x, const Vector& y);

// Mean and symmetric 95% confidence half-width (normal approximation).
struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};
MeanCi mean_ci95(const std::vector<double>& values);

}  // namespace coppo
