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

#include "coppo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace coppo {

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

RunLog run_log_from_trace(const std::string& variant_label, const std::string& objective,
                          std::uint64_t seed, const nlohmann::json& config,
                          const RunTrace& trace, bool keep_gradients) {
  RunLog log;
  log.variant_label = variant_label;
  log.objective = objective;
  log.seed = seed;
  log.config = config;
  log.step_rewards = trace.step_rewards;
  log.updates.reserve(trace.updates.size());
  for (const UpdateRecord& record : trace.updates) {
    RunLog::Update update;
    update.index = record.index;
    update.t_end = record.t_end;
    update.mean_reward = record.mean_batch_reward;
    update.objective = record.report.objective;
    update.grad_norm = record.report.grad_norm;
    update.ratio_prod_mean = record.report.ratio_prod_mean;
    update.ratio_prod_min = record.report.ratio_prod_min;
    update.ratio_prod_max = record.report.ratio_prod_max;
    if (keep_gradients) {
      // One vector per agent: the final-epoch score-form policy-gradient
      // estimate. Stored at 6 significant digits; diagnostics, not state.
      update.gradients.reserve(record.report.score_gradients.size());
      for (const Vector& score : record.report.score_gradients) {
        Vector g = score;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
          char buf[24];
          std::snprintf(buf, sizeof buf, "%.6g", g[i]);
          g[i] = std::atof(buf);
        }
        update.gradients.push_back({std::move(g)});
      }
    }
    log.updates.push_back(std::move(update));
  }
  log.events.reserve(trace.events.size());
  for (const EventRecord& event : trace.events) {
    log.events.push_back({event.update_index, event.timestep, event.joint_action,
                          event.common_action, event.odd_agent, event.agent_adv,
                          event.atilde});
  }
  return log;
}

void write_run_log(const std::string& path, const RunLog& log) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write run log: " + path);
  nlohmann::json header{{"type", "header"},
                        {"variant", log.variant_label},
                        {"objective", log.objective},
                        {"seed", log.seed},
                        {"config", log.config}};
  file << header.dump() << '\n';
  for (const RunLog::Update& update : log.updates) {
    nlohmann::json line{{"type", "update"},
                        {"idx", update.index},
                        {"t_end", update.t_end},
                        {"mean_reward", update.mean_reward},
                        {"objective", matrix_to_json(update.objective)},
                        {"grad_norm", matrix_to_json(update.grad_norm)},
                        {"ratio_prod_mean", matrix_to_json(update.ratio_prod_mean)},
                        {"ratio_prod_min", matrix_to_json(update.ratio_prod_min)},
                        {"ratio_prod_max", matrix_to_json(update.ratio_prod_max)}};
    if (!update.gradients.empty()) {
      nlohmann::json grads = nlohmann::json::array();
      for (const auto& per_agent : update.gradients) {
        nlohmann::json epochs = nlohmann::json::array();
        for (const Vector& g : per_agent) epochs.push_back(vector_to_json(g));
        grads.push_back(std::move(epochs));
      }
      line["grads"] = std::move(grads);
    }
    file << line.dump() << '\n';
  }
  for (const RunLog::Event& event : log.events) {
    nlohmann::json line{{"type", "event"},
                        {"update", event.update_index},
                        {"t", event.timestep},
                        {"joint_action", event.joint_action},
                        {"common", event.common_action},
                        {"odd", event.odd_agent},
                        {"adv", vector_to_json(event.agent_adv)},
                        {"atilde", matrix_to_json(event.atilde)}};
    file << line.dump() << '\n';
  }
  nlohmann::json rewards{{"type", "rewards"}, {"per_step", vector_to_json(log.step_rewards)}};
  file << rewards.dump() << '\n';
}

RunLog read_run_log(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot read run log: " + path);
  RunLog log;
  std::string line;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    const nlohmann::json doc = nlohmann::json::parse(line);
    const std::string type = doc.at("type").get<std::string>();
    if (type == "header") {
      log.variant_label = doc.at("variant").get<std::string>();
      log.objective = doc.at("objective").get<std::string>();
      log.seed = doc.at("seed").get<std::uint64_t>();
      log.config = doc.at("config");
    } else if (type == "update") {
      RunLog::Update update;
      update.index = doc.at("idx").get<int>();
      update.t_end = doc.at("t_end").get<long>();
      update.mean_reward = doc.at("mean_reward").get<double>();
      update.objective = matrix_from_json(doc.at("objective"));
      update.grad_norm = matrix_from_json(doc.at("grad_norm"));
      update.ratio_prod_mean = matrix_from_json(doc.at("ratio_prod_mean"));
      update.ratio_prod_min = matrix_from_json(doc.at("ratio_prod_min"));
      update.ratio_prod_max = matrix_from_json(doc.at("ratio_prod_max"));
      if (doc.contains("grads")) {
        for (const auto& per_agent : doc.at("grads")) {
          std::vector<Vector> epochs;
          for (const auto& g : per_agent) epochs.push_back(vector_from_json(g));
          update.gradients.push_back(std::move(epochs));
        }
      }
      log.updates.push_back(std::move(update));
    } else if (type == "event") {
      RunLog::Event event;
      event.update_index = doc.at("update").get<int>();
      event.timestep = doc.at("t").get<long>();
      event.joint_action = doc.at("joint_action").get<std::vector<int>>();
      event.common_action = doc.at("common").get<int>();
      event.odd_agent = doc.at("odd").get<int>();
      event.agent_adv = vector_from_json(doc.at("adv"));
      event.atilde = matrix_from_json(doc.at("atilde"));
      log.events.push_back(std::move(event));
    } else if (type == "rewards") {
      log.step_rewards = vector_from_json(doc.at("per_step"));
    } else {
      throw std::runtime_error("unknown run log line type: " + type);
    }
  }
  return log;
}

Vector windowed_mean(const Vector& series, long window) {
  if (window < 1) throw std::invalid_argument("windowed_mean: window >= 1");
  Vector out(series.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= window) acc -= series[i - window];
    out[i] = acc / std::min<long>(window, i + 1);
  }
  return out;
}

std::vector<double> post_penalty_advantage(const RunLog& log, int cap) {
  const bool reweighted = variant_reweights_by_others(variant_from_string(log.objective));
  std::vector<double> series;
  series.reserve(log.events.size());
  for (const RunLog::Event& event : log.events) {
    const int n_agents = static_cast<int>(event.agent_adv.size());
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < n_agents; ++j) {
      if (j == event.odd_agent) continue;
      sum += reweighted ? event.atilde.row(j).mean() : event.agent_adv[j];
      ++count;
    }
    if (count > 0) series.push_back(sum / count);
    if (cap > 0 && static_cast<int>(series.size()) >= cap) break;
  }
  return series;
}

std::vector<double> running_grad_variance(const RunLog& log, int window) {
  if (window < 1) throw std::invalid_argument("running_grad_variance: window >= 1");
  const int n_updates = static_cast<int>(log.updates.size());
  std::vector<double> series;
  if (n_updates == 0) return series;
  if (log.updates.front().gradients.empty()) {
    throw std::invalid_argument("running_grad_variance: log carries no gradients");
  }
  const int n_agents = static_cast<int>(log.updates.front().gradients.size());
  for (int u = window - 1; u < n_updates; ++u) {
    double agent_mean = 0.0;
    for (int i = 0; i < n_agents; ++i) {
      // Collect every epoch gradient of the window and average the
      // per-component population variances.
      std::vector<const Vector*> entries;
      for (int v = u - window + 1; v <= u; ++v) {
        for (const Vector& g : log.updates[v].gradients[i]) entries.push_back(&g);
      }
      const Eigen::Index dim = entries.front()->size();
      const double inv = 1.0 / static_cast<double>(entries.size());
      Vector mean = Vector::Zero(dim);
      for (const Vector* g : entries) mean += *g;
      mean *= inv;
      double comp_var = 0.0;
      for (const Vector* g : entries) comp_var += (*g - mean).squaredNorm();
      comp_var = comp_var * inv / static_cast<double>(dim);
      agent_mean += comp_var;
    }
    series.push_back(agent_mean / n_agents);
  }
  return series;
}

double bootstrap_superiority(const std::vector<double>& a, const std::vector<double>& b,
                             int resamples, Rng& rng) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("bootstrap_superiority: empty sample");
  }
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  int wins = 0;
  for (int r = 0; r < resamples; ++r) {
    double mean_a = 0.0;
    for (int i = 0; i < na; ++i) mean_a += a[uniform_int(rng, na)];
    mean_a /= na;
    double mean_b = 0.0;
    for (int i = 0; i < nb; ++i) mean_b += b[uniform_int(rng, nb)];
    mean_b /= nb;
    if (mean_a > mean_b) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(resamples);
}

namespace {

Vector ranks_with_ties(const Vector& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&x](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  Vector ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rho(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman_rho: need matched series of length >= 2");
  }
  const Vector rx = ranks_with_ties(x);
  const Vector ry = ranks_with_ties(y);
  const Vector cx = rx.array() - rx.mean();
  const Vector cy = ry.array() - ry.mean();
  const double denom = std::sqrt(cx.squaredNorm() * cy.squaredNorm());
  if (denom == 0.0) return 0.0;
  return cx.dot(cy) / denom;
}

MeanCi mean_ci95(const std::vector<double>& values) {
  MeanCi ci;
  if (values.empty()) return ci;
  const double n = static_cast<double>(values.size());
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return ci;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  ci.half_width = 1.96 * sd / std::sqrt(n);
  return ci;
}

}  // namespace coppo
