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

#include "coppo/matrix_game.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "coppo/env.hpp"

namespace coppo {
namespace {

TEST_CASE("penalty game rewards match the verbal rule") {
  const MatrixGameSpec game = penalty_game();
  CHECK(game.n_agents == 4);
  CHECK(game.n_actions == 9);

  CHECK(game.reward(std::vector<int>{3, 3, 3, 3}) == 50.0);
  CHECK(game.reward(std::vector<int>{3, 3, 3, 7}) == -50.0);
  CHECK(game.reward(std::vector<int>{3, 3, 7, 7}) == -40.0);
  CHECK(game.reward(std::vector<int>{0, 1, 2, 3}) == -40.0);
}

TEST_CASE("penalty game classes are exhaustive and disjoint over all joint actions") {
  const MatrixGameSpec game = penalty_game();
  int all_match = 0, three_match = 0, other = 0;
  std::vector<int> a(4, 0);
  for (int index = 0; index < game.joint_action_count(); ++index) {
    const JointActionClass cls = classify_joint_action(a);
    switch (cls.kind) {
      case JointActionClass::kAllMatch:
        ++all_match;
        CHECK(game.rewards[index] == 50.0);
        break;
      case JointActionClass::kThreeMatch:
        ++three_match;
        CHECK(game.rewards[index] == -50.0);
        CHECK(a[cls.odd_agent] != cls.common_action);
        break;
      default:
        ++other;
        CHECK(game.rewards[index] == -40.0);
    }
    for (int k = 3; k >= 0; --k) {
      if (++a[k] < 9) break;
      a[k] = 0;
    }
  }
  CHECK(all_match == 9);
  CHECK(three_match == 4 * 9 * 8);
  CHECK(all_match + three_match + other == 9 * 9 * 9 * 9);
}

TEST_CASE("appendix battery reward rules") {
  const std::vector<MatrixGameSpec> games = appendix_d_games();
  REQUIRE(games.size() == 6);

  SUBCASE("matching pays for unanimity only") {
    const MatrixGameSpec& g = games[0];
    CHECK(g.name == "matching");
    CHECK(g.reward(std::vector<int>{5, 5, 5, 5}) == 50.0);
    CHECK(g.reward(std::vector<int>{5, 5, 5, 2}) == -40.0);  // no miscoordination penalty
    int distinct_50 = 0;
    for (int i = 0; i < g.rewards.size(); ++i) {
      if (g.rewards[i] == 50.0) ++distinct_50;
      else CHECK(g.rewards[i] == -40.0);
    }
    CHECK(distinct_50 == 9);
  }

  SUBCASE("high-reward matching") {
    const MatrixGameSpec& g = games[1];
    CHECK(g.reward(std::vector<int>{1, 1, 1, 1}) == 100.0);
    CHECK(g.reward(std::vector<int>{1, 1, 1, 4}) == -50.0);
    CHECK(g.reward(std::vector<int>{1, 1, 4, 4}) == -40.0);
  }

  SUBCASE("one-optimal has a single rewarded joint action") {
    const MatrixGameSpec& g = games[2];
    CHECK(g.reward(std::vector<int>{1, 2, 3, 4}) == 50.0);
    CHECK(g.reward(std::vector<int>{1, 2, 3, 5}) == -50.0);
    int rewarded = 0;
    for (int i = 0; i < g.rewards.size(); ++i) {
      if (g.rewards[i] == 50.0) ++rewarded;
    }
    CHECK(rewarded == 1);
  }

  SUBCASE("climbing pays ten times the common action") {
    const MatrixGameSpec& g = games[3];
    CHECK(g.reward(std::vector<int>{3, 3, 3, 3}) == 30.0);
    CHECK(g.reward(std::vector<int>{7, 7, 7, 7}) == 70.0);
    CHECK(g.reward(std::vector<int>{8, 8, 8, 8}) == 80.0);
    CHECK(g.reward(std::vector<int>{8, 8, 8, 0}) == -40.0);
  }

  SUBCASE("climbing with flat penalty") {
    const MatrixGameSpec& g = games[4];
    CHECK(g.reward(std::vector<int>{6, 6, 6, 6}) == 60.0);
    CHECK(g.reward(std::vector<int>{6, 6, 6, 1}) == -50.0);
    CHECK(g.reward(std::vector<int>{6, 6, 1, 1}) == -40.0);
  }

  SUBCASE("climbing with escalating penalty") {
    const MatrixGameSpec& g = games[5];
    CHECK(g.reward(std::vector<int>{5, 5, 5, 5}) == 50.0);
    CHECK(g.reward(std::vector<int>{5, 5, 2, 5}) == -50.0);  // three agents on action 5
    CHECK(g.reward(std::vector<int>{8, 8, 8, 0}) == -80.0);
    CHECK(g.reward(std::vector<int>{2, 8, 8, 0}) == -40.0);
  }
}

TEST_CASE("game lookup by name") {
  CHECK(game_by_name("penalty").rewards.size() == 6561);
  CHECK(game_by_name("climbing").name == "climbing");
  CHECK_THROWS_AS(game_by_name("nope"), std::invalid_argument);
  CHECK(game_names().size() == 7);
}

TEST_CASE("json round trip preserves the dense reward table") {
  const MatrixGameSpec game = penalty_game();
  const MatrixGameSpec back = matrix_game_from_json(to_json(game));
  CHECK(back.n_agents == game.n_agents);
  CHECK(back.n_actions == game.n_actions);
  CHECK(back.rewards == game.rewards);
}

TEST_CASE("matrix game env terminates after one step") {
  MatrixGameEnv env(penalty_game());
  Rng rng = make_rng(1);
  env.reset(rng);
  CHECK_FALSE(env.terminal());
  const Transition t = env.step(std::vector<int>{0, 0, 0, 0}, rng);
  CHECK(t.reward == 50.0);
  CHECK(t.terminal);
  CHECK(env.terminal());
  CHECK_THROWS_AS(env.step(std::vector<int>{0, 0, 0, 0}, rng), std::logic_error);
  env.reset(rng);
  CHECK_THROWS_AS(env.step(std::vector<int>{0, 0, 0, 9}, rng), std::out_of_range);
}

}  // namespace
}  // namespace coppo
