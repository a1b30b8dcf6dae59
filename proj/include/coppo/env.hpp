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

#include <memory>
#include <vector>

#include "coppo/dec_pomdp.hpp"
#include "coppo/matrix_game.hpp"
#include "coppo/types.hpp"

namespace coppo {

// One environment step. Observations are per-agent indices; `state` is the
// global state available to centralized critics (0 for stateless games).
struct Transition {
  std::vector<int> observations;
  std::vector<int> joint_action;
  double reward = 0.0;
  std::vector<int> next_observations;
  bool terminal = false;
  int state = 0;
  int next_state = 0;
};

// Decision-process interface used by rollout collection. Instances own no
// RNG; callers pass one per worker, so independent copies can run
// concurrently without shared state.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int n_agents() const = 0;
  virtual int n_actions() const = 0;
  virtual int n_obs() const = 0;
  virtual int n_states() const = 0;
  virtual void reset(Rng& rng) = 0;
  virtual std::vector<int> observations() const = 0;
  virtual bool terminal() const = 0;
  // Throws std::out_of_range for invalid actions and std::logic_error when
  // stepping a terminal environment.
  virtual Transition step(std::span<const int> joint_action, Rng& rng) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

// Repeated one-shot play of a matrix game: a constant dummy observation per
// agent, terminal after each step.
class MatrixGameEnv : public Environment {
 public:
  explicit MatrixGameEnv(MatrixGameSpec spec);

  int n_agents() const override { return spec_.n_agents; }
  int n_actions() const override { return spec_.n_actions; }
  int n_obs() const override { return 1; }
  int n_states() const override { return 1; }
  void reset(Rng& rng) override;
  std::vector<int> observations() const override;
  bool terminal() const override { return terminal_; }
  Transition step(std::span<const int> joint_action, Rng& rng) override;
  std::unique_ptr<Environment> clone() const override;

  const MatrixGameSpec& spec() const { return spec_; }

 private:
  MatrixGameSpec spec_;
  bool terminal_ = false;
};

// Infinite-horizon rollout over a TabularDecPomdp; next states are sampled
// from the transition rows.
class TabularEnv : public Environment {
 public:
  explicit TabularEnv(TabularDecPomdp model);

  int n_agents() const override { return model_.n_agents; }
  int n_actions() const override { return model_.n_actions; }
  int n_obs() const override { return model_.n_obs; }
  int n_states() const override { return model_.n_states; }
  void reset(Rng& rng) override;
  std::vector<int> observations() const override;
  bool terminal() const override { return false; }
  Transition step(std::span<const int> joint_action, Rng& rng) override;
  std::unique_ptr<Environment> clone() const override;

  const TabularDecPomdp& model() const { return model_; }
  int state() const { return state_; }

 private:
  std::vector<int> observations_of(int state) const;

  TabularDecPomdp model_;
  int state_ = 0;
};

}  // namespace coppo
