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

#include "coppo/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

namespace coppo {

namespace fs = std::filesystem;

namespace {

// Shortest-round-trip-ish formatting shared by every CSV writer.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string run_path(const std::string& dir, const std::string& label, int seed_index) {
  return dir + "/runs/" + label + "/seed_" + std::to_string(seed_index) + ".jsonl";
}

}  // namespace

VariantArm parse_variant_token(const std::string& token, double default_epsilon_inner) {
  VariantArm arm;
  arm.label = token;
  arm.epsilon_inner = default_epsilon_inner;
  std::string name = token;
  const auto at = token.find('@');
  if (at != std::string::npos) {
    name = token.substr(0, at);
    try {
      std::size_t pos = 0;
      arm.epsilon_inner = std::stod(token.substr(at + 1), &pos);
      if (pos != token.size() - at - 1) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError("bad inner threshold in variant token: " + token);
    }
  }
  arm.variant = variant_from_string(name);  // throws std::invalid_argument
  if (at != std::string::npos && !variant_uses_inner_clip(arm.variant)) {
    throw ConfigError("variant does not take an inner threshold: " + token);
  }
  return arm;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  kv.require_known_keys({
      "game", "variants", "seeds", "base_seed", "total_timesteps",
      "steps_per_rollout", "rollout_workers", "learning_rate", "optimizer",
      "rmsprop_alpha", "gamma", "epochs", "epsilon_outer", "epsilon_inner",
      "epsilon_greedy_start", "epsilon_greedy_end", "epsilon_greedy_anneal",
      "critic", "critic_hidden_dim", "critic_epochs", "policy",
      "policy_hidden_dim", "normalize_advantages", "sequential_agent_updates",
      "reward_window", "grad_variance_window", "penalty_event_cap",
      "log_gradients", "output_dir", "workers",
  });
  ExperimentConfig c;
  c.game = kv.get_string("game", c.game);
  c.variants = kv.get_list("variants", c.variants);
  c.seeds = kv.get_int("seeds", c.seeds);
  c.base_seed = static_cast<std::uint64_t>(kv.get_long("base_seed", static_cast<long>(c.base_seed)));
  c.total_timesteps = kv.get_long("total_timesteps", c.total_timesteps);
  c.steps_per_rollout = kv.get_int("steps_per_rollout", c.steps_per_rollout);
  c.rollout_workers = kv.get_int("rollout_workers", c.rollout_workers);
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.optimizer = kv.get_string("optimizer", c.optimizer);
  c.rmsprop_alpha = kv.get_double("rmsprop_alpha", c.rmsprop_alpha);
  c.gamma = kv.get_double("gamma", c.gamma);
  c.epochs = kv.get_int("epochs", c.epochs);
  c.epsilon_outer = kv.get_double("epsilon_outer", c.epsilon_outer);
  c.epsilon_inner = kv.get_double("epsilon_inner", c.epsilon_inner);
  c.epsilon_greedy_start = kv.get_double("epsilon_greedy_start", c.epsilon_greedy_start);
  c.epsilon_greedy_end = kv.get_double("epsilon_greedy_end", c.epsilon_greedy_end);
  c.epsilon_greedy_anneal = kv.get_long("epsilon_greedy_anneal", c.epsilon_greedy_anneal);
  c.critic = kv.get_string("critic", c.critic);
  c.critic_hidden_dim = kv.get_int("critic_hidden_dim", c.critic_hidden_dim);
  c.critic_epochs = kv.get_int("critic_epochs", c.critic_epochs);
  c.policy = kv.get_string("policy", c.policy);
  c.policy_hidden_dim = kv.get_int("policy_hidden_dim", c.policy_hidden_dim);
  c.normalize_advantages = kv.get_bool("normalize_advantages", c.normalize_advantages);
  c.sequential_agent_updates =
      kv.get_bool("sequential_agent_updates", c.sequential_agent_updates);
  c.reward_window = kv.get_long("reward_window", c.reward_window);
  c.grad_variance_window = kv.get_int("grad_variance_window", c.grad_variance_window);
  c.penalty_event_cap = kv.get_int("penalty_event_cap", c.penalty_event_cap);
  c.log_gradients = kv.get_bool("log_gradients", c.log_gradients);
  c.output_dir = kv.get_string("output_dir", c.output_dir);
  c.workers = kv.get_int("workers", c.workers);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(KeyValueConfig::parse_file(path));
}

void ExperimentConfig::validate() const {
  try {
    game_by_name(game);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (variants.empty()) throw ConfigError("variants must be non-empty");
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  if (total_timesteps < 1) throw ConfigError("total_timesteps must be > 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (reward_window < 1) throw ConfigError("reward_window must be >= 1");
  if (grad_variance_window < 1) throw ConfigError("grad_variance_window must be >= 1");
  for (const std::string& token : variants) {
    VariantArm arm = parse_variant_token(token, epsilon_inner);  // throws on bad tokens
    try {
      train_config(arm, 0).validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("variant ") + token + ": " + e.what());
    }
  }
  try {
    policy_arch_from_string(policy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  return nlohmann::json{{"game", game},
                        {"variants", variants},
                        {"seeds", seeds},
                        {"base_seed", base_seed},
                        {"total_timesteps", total_timesteps},
                        {"steps_per_rollout", steps_per_rollout},
                        {"rollout_workers", rollout_workers},
                        {"learning_rate", learning_rate},
                        {"optimizer", optimizer},
                        {"rmsprop_alpha", rmsprop_alpha},
                        {"gamma", gamma},
                        {"epochs", epochs},
                        {"epsilon_outer", epsilon_outer},
                        {"epsilon_inner", epsilon_inner},
                        {"epsilon_greedy_start", epsilon_greedy_start},
                        {"epsilon_greedy_end", epsilon_greedy_end},
                        {"epsilon_greedy_anneal", epsilon_greedy_anneal},
                        {"critic", critic},
                        {"critic_hidden_dim", critic_hidden_dim},
                        {"critic_epochs", critic_epochs},
                        {"policy", policy},
                        {"policy_hidden_dim", policy_hidden_dim},
                        {"normalize_advantages", normalize_advantages},
                        {"sequential_agent_updates", sequential_agent_updates},
                        {"reward_window", reward_window},
                        {"grad_variance_window", grad_variance_window},
                        {"penalty_event_cap", penalty_event_cap},
                        {"log_gradients", log_gradients},
                        {"output_dir", output_dir},
                        {"workers", workers},
                        {"version", kVersion}};
}

TrainConfig ExperimentConfig::train_config(const VariantArm& arm, int seed_index) const {
  TrainConfig tc;
  tc.variant = arm.variant;
  tc.learning_rate = learning_rate;
  tc.optimizer = optimizer;
  tc.rmsprop_alpha = rmsprop_alpha;
  tc.rollout_workers = rollout_workers;
  tc.steps_per_rollout = steps_per_rollout;
  tc.total_timesteps = total_timesteps;
  tc.gamma = gamma;
  tc.seed = base_seed + static_cast<std::uint64_t>(seed_index);
  tc.clip.epsilon_outer = epsilon_outer;
  tc.clip.epsilon_inner = arm.epsilon_inner;
  tc.clip.epochs = arm.variant == ObjectiveVariant::kVanillaPg ? 1 : epochs;
  tc.epsilon_greedy = {epsilon_greedy_start, epsilon_greedy_end, epsilon_greedy_anneal};
  tc.critic = critic;
  tc.critic_hidden_dim = critic_hidden_dim;
  tc.critic_epochs = critic_epochs;
  tc.policy_arch = policy_arch_from_string(policy);
  tc.mlp_hidden_dim = policy_hidden_dim;
  tc.sequential_agent_updates = sequential_agent_updates;
  tc.normalize_advantages = normalize_advantages;
  return tc;
}

namespace {

struct Job {
  VariantArm arm;
  int seed_index = 0;
};

void execute_job(const ExperimentConfig& config, const Job& job) {
  const MatrixGameEnv env(game_by_name(config.game));
  const TrainConfig tc = config.train_config(job.arm, job.seed_index);
  const auto flag = [](std::span<const int> actions) {
    return classify_joint_action(actions).kind == JointActionClass::kThreeMatch;
  };
  const RunTrace trace = train_run(env, tc, flag);

  nlohmann::json run_config = config.to_json();
  // Delivery knobs do not affect the run's numbers; keeping them out of the
  // echoed config makes run logs byte-identical wherever they are written.
  run_config.erase("output_dir");
  run_config.erase("workers");
  run_config["arm_epsilon_inner"] = job.arm.epsilon_inner;
  run_config["arm_epochs"] = tc.clip.epochs;
  run_config["seed"] = tc.seed;
  const RunLog log =
      run_log_from_trace(job.arm.label, to_string(job.arm.variant), tc.seed, run_config,
                         trace, config.log_gradients);
  write_run_log(run_path(config.output_dir, job.arm.label, job.seed_index), log);
}

// Smoothed reward sampled at each update boundary; the aggregation x-axis.
std::vector<std::pair<long, double>> reward_curve(const RunLog& log, long window) {
  const Vector smooth = windowed_mean(log.step_rewards, window);
  std::vector<std::pair<long, double>> curve;
  curve.reserve(log.updates.size());
  for (const RunLog::Update& update : log.updates) {
    curve.emplace_back(update.t_end, smooth[update.t_end - 1]);
  }
  return curve;
}

void write_aggregate_csv(const ExperimentConfig& config, const VariantArm& arm) {
  std::vector<std::vector<std::pair<long, double>>> curves;
  curves.reserve(config.seeds);
  for (int s = 0; s < config.seeds; ++s) {
    const RunLog log = read_run_log(run_path(config.output_dir, arm.label, s));
    curves.push_back(reward_curve(log, config.reward_window));
  }
  std::ofstream csv(config.output_dir + "/aggregate/" + arm.label + ".csv");
  if (!csv) throw std::runtime_error("cannot write aggregate csv");
  csv << "t,mean_reward,ci95_lo,ci95_hi,n_seeds\n";
  for (std::size_t u = 0; u < curves.front().size(); ++u) {
    std::vector<double> values;
    values.reserve(curves.size());
    for (const auto& curve : curves) values.push_back(curve[u].second);
    const MeanCi ci = mean_ci95(values);
    csv << curves.front()[u].first << ',' << format_double(ci.mean) << ','
        << format_double(ci.mean - ci.half_width) << ','
        << format_double(ci.mean + ci.half_width) << ',' << curves.size() << '\n';
  }
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<VariantArm> arms;
  for (const std::string& token : config.variants) {
    arms.push_back(parse_variant_token(token, config.epsilon_inner));
  }

  fs::create_directories(config.output_dir + "/aggregate");
  for (const VariantArm& arm : arms) {
    fs::create_directories(config.output_dir + "/runs/" + arm.label);
  }

  std::vector<Job> jobs;
  for (const VariantArm& arm : arms) {
    for (int s = 0; s < config.seeds; ++s) jobs.push_back({arm, s});
  }

  if (config.workers <= 1) {
    for (const Job& job : jobs) execute_job(config, job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(config.workers, static_cast<int>(jobs.size()));
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
          execute_job(config, jobs[j]);
        }
      });
    }
    for (std::thread& thread : pool) thread.join();
  }

  for (const VariantArm& arm : arms) write_aggregate_csv(config, arm);

  nlohmann::json manifest{{"config", config.to_json()},
                          {"version", kVersion},
                          {"arms", nlohmann::json::array()}};
  for (const VariantArm& arm : arms) {
    manifest["arms"].push_back({{"label", arm.label},
                                {"objective", to_string(arm.variant)},
                                {"epsilon_inner", arm.epsilon_inner}});
  }
  std::ofstream out(config.output_dir + "/manifest.json");
  out << manifest.dump(2) << '\n';
}

namespace {

struct LoadedRuns {
  std::vector<RunLog> logs;  // all arms and seeds that exist on disk
  std::vector<std::string> warnings;
  nlohmann::json manifest;
};

LoadedRuns load_results(const std::string& results_dir) {
  LoadedRuns loaded;
  const std::string manifest_path = results_dir + "/manifest.json";
  std::ifstream manifest_file(manifest_path);
  if (!manifest_file) {
    loaded.warnings.push_back("missing manifest: " + manifest_path);
    return loaded;
  }
  manifest_file >> loaded.manifest;
  const auto& config = loaded.manifest.at("config");
  const int seeds = config.at("seeds").get<int>();
  for (const auto& arm : loaded.manifest.at("arms")) {
    const std::string label = arm.at("label").get<std::string>();
    for (int s = 0; s < seeds; ++s) {
      const std::string path = run_path(results_dir, label, s);
      if (!fs::exists(path)) {
        loaded.warnings.push_back("missing run: " + path);
        continue;
      }
      loaded.logs.push_back(read_run_log(path));
    }
  }
  return loaded;
}

void write_panel_csv(const std::string& path,
                     const std::vector<std::array<std::string, 4>>& rows) {
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write " + path);
  csv << "variant,seed,x,y\n";
  for (const auto& row : rows) {
    csv << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << '\n';
  }
}

bool is_sweep_label(const std::string& label) {
  return label.rfind("coppo@", 0) == 0 || label == "per-agent-no-inner-clip" ||
         label == "no-inner-clip";
}

}  // namespace

void emit_plot_data(const std::string& results_dir) {
  LoadedRuns loaded = load_results(results_dir);
  const std::string plot_dir = results_dir + "/plots";
  fs::create_directories(plot_dir);

  long reward_window = 100;
  int variance_window = 50;
  int event_cap = 0;
  if (!loaded.manifest.is_null()) {
    const auto& config = loaded.manifest.at("config");
    reward_window = config.at("reward_window").get<long>();
    variance_window = config.at("grad_variance_window").get<int>();
    event_cap = config.at("penalty_event_cap").get<int>();
  }

  using Rows = std::vector<std::array<std::string, 4>>;
  Rows reward_rows, event_rows, trace_rows, variance_rows;
  Rows sweep_reward_rows, sweep_variance_rows;

  // Global minimum event count, so every run reports series of equal length.
  std::size_t min_events = std::numeric_limits<std::size_t>::max();
  for (const RunLog& log : loaded.logs) {
    min_events = std::min(min_events, log.events.size());
  }
  if (loaded.logs.empty()) min_events = 0;
  int cap = static_cast<int>(min_events);
  if (event_cap > 0) cap = std::min(cap, event_cap);

  for (const RunLog& log : loaded.logs) {
    const std::string seed_str = std::to_string(log.seed);
    const bool sweep = is_sweep_label(log.variant_label);

    for (const auto& [t, y] : reward_curve(log, reward_window)) {
      std::array<std::string, 4> row{log.variant_label, seed_str, std::to_string(t),
                                     format_double(y)};
      reward_rows.push_back(row);
      if (sweep) sweep_reward_rows.push_back(row);
    }

    const std::vector<double> events = post_penalty_advantage(log, cap);
    for (std::size_t e = 0; e < events.size(); ++e) {
      event_rows.push_back({log.variant_label, seed_str, std::to_string(e),
                            format_double(events[e])});
    }

    // Mean |modified advantage| per epoch over matching agents and events.
    if (!log.events.empty()) {
      const Eigen::Index K = log.events.front().atilde.cols();
      Vector per_epoch = Vector::Zero(K);
      long count = 0;
      for (const RunLog::Event& event : log.events) {
        for (Eigen::Index j = 0; j < event.atilde.rows(); ++j) {
          if (static_cast<int>(j) == event.odd_agent) continue;
          per_epoch += event.atilde.row(j).cwiseAbs().transpose();
        }
        count += event.atilde.rows() - 1;
      }
      if (count > 0) per_epoch /= static_cast<double>(count);
      for (Eigen::Index k = 0; k < K; ++k) {
        trace_rows.push_back({log.variant_label, seed_str, std::to_string(k),
                              format_double(per_epoch[k])});
      }
    }

    if (!log.updates.empty() && !log.updates.front().gradients.empty()) {
      const std::vector<double> variance = running_grad_variance(log, variance_window);
      for (std::size_t i = 0; i < variance.size(); ++i) {
        const long x = static_cast<long>(i) + variance_window - 1;
        std::array<std::string, 4> row{log.variant_label, seed_str, std::to_string(x),
                                       format_double(variance[i])};
        variance_rows.push_back(row);
        if (sweep) sweep_variance_rows.push_back(row);
      }
    }
  }

  write_panel_csv(plot_dir + "/fig1_reward.csv", reward_rows);
  write_panel_csv(plot_dir + "/fig1_post_penalty_advantage.csv", event_rows);
  write_panel_csv(plot_dir + "/fig1_atilde_trace.csv", trace_rows);
  write_panel_csv(plot_dir + "/fig1_grad_variance.csv", variance_rows);
  if (!sweep_reward_rows.empty()) {
    write_panel_csv(plot_dir + "/fig2_reward.csv", sweep_reward_rows);
    write_panel_csv(plot_dir + "/fig2_grad_variance.csv", sweep_variance_rows);
  }

  nlohmann::json warn{{"warnings", loaded.warnings}};
  std::ofstream warn_file(plot_dir + "/warnings.json");
  warn_file << warn.dump(2) << '\n';
}

}  // namespace coppo
