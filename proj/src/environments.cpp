// Copyright 2026 The ES-ENAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "esenas/environments.hpp"

#include <algorithm>
#include <cmath>

#include "esenas/errors.hpp"
#include "esenas/rng.hpp"

namespace esenas {
namespace {

double quad_form(const std::vector<std::vector<double>>& m,
                 std::span<const double> v) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) total += v[i] * m[i][j] * v[j];
  }
  return total;
}

void check_matrix(const std::vector<std::vector<double>>& m, std::size_t rows,
                  std::size_t cols, const char* name) {
  if (m.size() != rows) throw DimensionMismatch(std::string(name) + ": bad row count");
  for (const auto& row : m) {
    if (row.size() != cols)
      throw DimensionMismatch(std::string(name) + ": bad column count");
  }
}

}  // namespace

Trajectory rollout(Environment& env, const PolicyGraph& graph,
                   const RunningNormalizer& normalizer_snapshot, bool training,
                   std::uint64_t episode_seed) {
  if (graph.state_dim != env.state_dim() || graph.action_dim != env.action_dim())
    throw DimensionMismatch("policy dims do not match environment dims");

  env.bind_policy(graph);
  Trajectory traj;
  traj.normalizer_partial = RunningNormalizer(env.state_dim());
  std::vector<double> state = env.reset(episode_seed);
  const double bonus = env.alive_bonus_per_step();

  for (int t = 0; t < env.horizon(); ++t) {
    if (training) traj.normalizer_partial.observe(state);
    const std::vector<double> z = normalizer_snapshot.normalize(state);
    std::vector<double> action;
    try {
      action = graph.forward(z);
    } catch (const NonFiniteActivation& e) {
      throw NonFiniteActivation(std::string(e.what()) + " at step " +
                                std::to_string(t));
    }
    StepResult result = env.step(action);
    traj.rewards.push_back(result.reward);
    traj.total_eval_reward += result.reward;
    ++traj.steps_taken;
    state = std::move(result.state);
    if (result.done) break;
  }
  traj.total_training_reward = traj.total_eval_reward - bonus * traj.steps_taken;
  return traj;
}

LqrEnv::LqrEnv(std::vector<std::vector<double>> a,
               std::vector<std::vector<double>> b,
               std::vector<std::vector<double>> q,
               std::vector<std::vector<double>> r, double noise_scale,
               int horizon, std::uint64_t seed)
    : a_(std::move(a)),
      b_(std::move(b)),
      q_(std::move(q)),
      r_(std::move(r)),
      noise_scale_(noise_scale),
      horizon_(horizon),
      seed_(seed) {
  const std::size_t ds = a_.size();
  if (ds == 0 || horizon_ < 1) throw DimensionMismatch("bad LQR instance");
  const std::size_t da = b_.empty() ? 0 : b_[0].size();
  check_matrix(a_, ds, ds, "A");
  check_matrix(b_, ds, da, "B");
  check_matrix(q_, ds, ds, "Q");
  check_matrix(r_, da, da, "R");
}

LqrEnv LqrEnv::default_instance(std::uint64_t seed, int horizon,
                                double noise_scale) {
  const int ds = 6, da = 3;
  std::vector<std::vector<double>> a(ds, std::vector<double>(ds, 0.0));
  for (int i = 0; i < ds; ++i) {
    a[i][i] = 0.9;
    if (i + 1 < ds) a[i][i + 1] = 0.1;
  }
  std::vector<std::vector<double>> b(ds, std::vector<double>(da, 0.0));
  for (int i = 0; i < ds; ++i) b[i][i % da] = 1.0;
  std::vector<std::vector<double>> q(ds, std::vector<double>(ds, 0.0));
  for (int i = 0; i < ds; ++i) q[i][i] = 1.0;
  std::vector<std::vector<double>> r(da, std::vector<double>(da, 0.0));
  for (int i = 0; i < da; ++i) r[i][i] = 0.1;
  return LqrEnv(std::move(a), std::move(b), std::move(q), std::move(r),
                noise_scale, horizon, seed);
}

std::vector<double> LqrEnv::reset(std::uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  t_ = 0;
  CounterRng rng(mix_seeds(seed_, episode_seed), /*stream=*/0);
  state_.assign(a_.size(), 0.0);
  for (auto& s : state_) s = rng.next_gaussian();
  return state_;
}

StepResult LqrEnv::step(std::span<const double> action) {
  if (action.size() != b_[0].size())
    throw DimensionMismatch("LQR action has wrong dimension");
  StepResult out;
  out.reward = -(quad_form(q_, state_) + quad_form(r_, action));

  std::vector<double> next(state_.size(), 0.0);
  for (std::size_t i = 0; i < state_.size(); ++i) {
    for (std::size_t j = 0; j < state_.size(); ++j) next[i] += a_[i][j] * state_[j];
    for (std::size_t j = 0; j < action.size(); ++j) next[i] += b_[i][j] * action[j];
  }
  if (noise_scale_ > 0.0) {
    CounterRng rng(mix_seeds(seed_, episode_seed_),
                   /*stream=*/static_cast<std::uint64_t>(t_) + 1);
    for (auto& s : next) s += noise_scale_ * rng.next_gaussian();
  }
  state_ = std::move(next);
  ++t_;
  out.state = state_;
  out.done = t_ >= horizon_;
  return out;
}

SparseOracleEnv::SparseOracleEnv(int state_dim, int action_dim,
                                 std::vector<int> true_support,
                                 double noise_scale, std::uint64_t seed,
                                 int horizon, double edge_cost)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      horizon_(horizon),
      true_support_(std::move(true_support)),
      noise_scale_(noise_scale),
      edge_cost_(edge_cost),
      seed_(seed) {
  if (state_dim_ < 1 || action_dim_ < 1 || horizon_ < 1)
    throw DimensionMismatch("bad oracle instance");
  const int e_max = state_dim_ * action_dim_;
  std::sort(true_support_.begin(), true_support_.end());
  for (std::size_t t = 0; t < true_support_.size(); ++t) {
    if (true_support_[t] < 0 || true_support_[t] >= e_max)
      throw BadSupport("support edge index out of range");
    if (t > 0 && true_support_[t] == true_support_[t - 1])
      throw BadSupport("duplicate support edge");
  }
  target_.assign(e_max, 0.0);
  CounterRng rng(seed_, /*stream=*/0x57);
  // Target weights bounded away from zero so every support edge carries
  // signal.
  for (int e : true_support_) {
    const double mag = 0.5 + rng.next_double();
    target_[e] = rng.next_double() < 0.5 ? -mag : mag;
  }
}

void SparseOracleEnv::draw_x() {
  CounterRng rng(mix_seeds(seed_, episode_seed_),
                 /*stream=*/(1ULL << 32) + static_cast<std::uint64_t>(t_));
  x_.assign(static_cast<std::size_t>(state_dim_), 0.0);
  for (auto& v : x_) v = rng.next_gaussian();
}

std::vector<double> SparseOracleEnv::reset(std::uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  t_ = 0;
  draw_x();
  return x_;
}

StepResult SparseOracleEnv::step(std::span<const double> action) {
  if (static_cast<int>(action.size()) != action_dim_)
    throw DimensionMismatch("oracle action has wrong dimension");
  double residual = 0.0;
  for (int j = 0; j < action_dim_; ++j) {
    double want = 0.0;
    for (int i = 0; i < state_dim_; ++i) want += target_[i * action_dim_ + j] * x_[i];
    const double diff = want - action[j];
    residual += diff * diff;
  }
  StepResult out;
  out.reward = -residual - edge_cost_ * active_edges_;
  if (noise_scale_ > 0.0) {
    CounterRng rng(mix_seeds(seed_, episode_seed_),
                   /*stream=*/static_cast<std::uint64_t>(t_) + 2);
    out.reward += noise_scale_ * rng.next_gaussian();
  }
  ++t_;
  draw_x();  // a fresh x per step; episode reward averages over iid draws
  out.state = x_;
  out.done = t_ >= horizon_;
  return out;
}

AliveBonusEnv::AliveBonusEnv(std::unique_ptr<Environment> inner, double bonus)
    : inner_(std::move(inner)), bonus_(bonus) {}

AliveBonusEnv::AliveBonusEnv(const AliveBonusEnv& other)
    : inner_(other.inner_->clone()), bonus_(other.bonus_) {}

StepResult AliveBonusEnv::step(std::span<const double> action) {
  StepResult out = inner_->step(action);
  out.reward += bonus_;
  return out;
}

std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const nlohmann::json& params,
                                              std::uint64_t seed) {
  std::unique_ptr<Environment> env;
  if (name == "lqr") {
    const int horizon = params.value("horizon", 200);
    const double noise = params.value("noise_scale", 0.0);
    env = std::make_unique<LqrEnv>(LqrEnv::default_instance(seed, horizon, noise));
  } else if (name == "sparse_oracle") {
    if (!params.contains("state_dim") || !params.contains("action_dim") ||
        !params.contains("true_support"))
      throw ConfigError("sparse_oracle needs state_dim, action_dim, true_support");
    env = std::make_unique<SparseOracleEnv>(
        params["state_dim"].get<int>(), params["action_dim"].get<int>(),
        params["true_support"].get<std::vector<int>>(),
        params.value("noise_scale", 0.0), seed, params.value("horizon", 20),
        params.value("edge_cost", 0.01));
  } else {
    throw ConfigError("unknown environment '" + name + "'");
  }
  const double bonus = params.value("alive_bonus", 0.0);
  if (bonus != 0.0) env = std::make_unique<AliveBonusEnv>(std::move(env), bonus);
  return env;
}

}  // namespace esenas
