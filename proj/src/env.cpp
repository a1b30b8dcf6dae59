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

#include "coppo/env.hpp"

#include <stdexcept>

namespace coppo {

namespace {

void check_actions(std::span<const int> joint_action, int n_agents, int n_actions) {
  if (static_cast<int>(joint_action.size()) != n_agents) {
    throw std::invalid_argument("step: wrong number of actions");
  }
  for (int a : joint_action) {
    if (a < 0 || a >= n_actions) throw std::out_of_range("step: action out of range");
  }
}

}  // namespace

MatrixGameEnv::MatrixGameEnv(MatrixGameSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

void MatrixGameEnv::reset(Rng&) { terminal_ = false; }

std::vector<int> MatrixGameEnv::observations() const {
  return std::vector<int>(spec_.n_agents, 0);
}

Transition MatrixGameEnv::step(std::span<const int> joint_action, Rng&) {
  if (terminal_) throw std::logic_error("step: episode already terminal");
  check_actions(joint_action, spec_.n_agents, spec_.n_actions);
  terminal_ = true;
  Transition t;
  t.observations = observations();
  t.joint_action.assign(joint_action.begin(), joint_action.end());
  t.reward = spec_.reward(joint_action);
  t.next_observations = t.observations;
  t.terminal = true;
  return t;
}

std::unique_ptr<Environment> MatrixGameEnv::clone() const {
  return std::make_unique<MatrixGameEnv>(*this);
}

TabularEnv::TabularEnv(TabularDecPomdp model) : model_(std::move(model)) {
  model_.validate();
}

void TabularEnv::reset(Rng& rng) { state_ = sample_categorical(rng, model_.initial_dist); }

std::vector<int> TabularEnv::observations_of(int state) const {
  std::vector<int> obs(model_.n_agents);
  for (int i = 0; i < model_.n_agents; ++i) obs[i] = model_.observation(state, i);
  return obs;
}

std::vector<int> TabularEnv::observations() const { return observations_of(state_); }

Transition TabularEnv::step(std::span<const int> joint_action, Rng& rng) {
  check_actions(joint_action, model_.n_agents, model_.n_actions);
  const int joint = model_.joint_index(joint_action);
  const int row = state_ * model_.joint_action_count() + joint;
  Transition t;
  t.observations = observations_of(state_);
  t.joint_action.assign(joint_action.begin(), joint_action.end());
  t.reward = model_.reward(state_, joint);
  t.state = state_;
  t.next_state = sample_categorical(rng, model_.transition.row(row).transpose());
  t.next_observations = observations_of(t.next_state);
  t.terminal = false;
  state_ = t.next_state;
  return t;
}

std::unique_ptr<Environment> TabularEnv::clone() const {
  return std::make_unique<TabularEnv>(*this);
}

}  // namespace coppo
