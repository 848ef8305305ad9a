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

#ifndef ESENAS_ENVIRONMENTS_HPP_
#define ESENAS_ENVIRONMENTS_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esenas/normalizer.hpp"
#include "esenas/policy.hpp"

namespace esenas {

struct StepResult {
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
};

// Pure, seeded state-transition environments. All randomness is drawn from
// counter-based streams keyed by (env seed, episode seed, step), so any
// worker replays an episode exactly.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual double alive_bonus_per_step() const { return 0.0; }

  // Called once per rollout before reset, with the materialized policy.
  // Environments that price architecture complexity read the edge count here.
  virtual void bind_policy(const PolicyGraph& graph) { (void)graph; }

  virtual std::vector<double> reset(std::uint64_t episode_seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

struct Trajectory {
  std::vector<double> rewards;            // per step, alive bonus included
  double total_training_reward = 0.0;     // alive bonus excluded
  double total_eval_reward = 0.0;         // alive bonus included
  int steps_taken = 0;
  RunningNormalizer normalizer_partial;   // filled when training
};

// Runs one episode. States are normalized with the (frozen) snapshot before
// each forward pass; when training, raw observations are also accumulated
// into the returned partial statistics.
Trajectory rollout(Environment& env, const PolicyGraph& graph,
                   const RunningNormalizer& normalizer_snapshot, bool training,
                   std::uint64_t episode_seed);

// Linear dynamics s' = A s + B a + noise, quadratic cost
// r = -(s'Qs + a'Ra). The default instance is a stable 6-state/3-action
// system used throughout the test suites.
class LqrEnv : public Environment {
 public:
  LqrEnv(std::vector<std::vector<double>> a, std::vector<std::vector<double>> b,
         std::vector<std::vector<double>> q, std::vector<std::vector<double>> r,
         double noise_scale, int horizon, std::uint64_t seed);
  static LqrEnv default_instance(std::uint64_t seed, int horizon = 200,
                                 double noise_scale = 0.0);

  int state_dim() const override { return static_cast<int>(a_.size()); }
  int action_dim() const override { return static_cast<int>(b_[0].size()); }
  int horizon() const override { return horizon_; }
  std::vector<double> reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<LqrEnv>(*this);
  }

  const std::vector<std::vector<double>>& dynamics() const { return a_; }
  const std::vector<std::vector<double>>& input_matrix() const { return b_; }
  const std::vector<std::vector<double>>& state_cost() const { return q_; }
  const std::vector<std::vector<double>>& action_cost() const { return r_; }

 private:
  std::vector<std::vector<double>> a_, b_, q_, r_;
  double noise_scale_;
  int horizon_;
  std::uint64_t seed_;
  std::vector<double> state_;
  std::uint64_t episode_seed_ = 0;
  int t_ = 0;
};

// Architecture-recovery oracle over a linear policy: a fixed target matrix
// W*, zero outside `true_support` (indices into the linear candidate-edge
// list). Every step observes a fresh x ~ N(0, I); per-step reward is
// -|W* x - pi(x)|^2 minus an edge_cost penalty per active policy edge, so the
// globally optimal boolean edge genome selects exactly the true support.
class SparseOracleEnv : public Environment {
 public:
  SparseOracleEnv(int state_dim, int action_dim,
                  std::vector<int> true_support, double noise_scale,
                  std::uint64_t seed, int horizon = 20,
                  double edge_cost = 0.01);

  int state_dim() const override { return state_dim_; }
  int action_dim() const override { return action_dim_; }
  int horizon() const override { return horizon_; }
  void bind_policy(const PolicyGraph& graph) override {
    active_edges_ = static_cast<int>(graph.edges.size());
  }
  std::vector<double> reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<SparseOracleEnv>(*this);
  }

  const std::vector<int>& true_support() const { return true_support_; }
  // Target weight for candidate edge e (row-major state x action order).
  double target_weight(int e) const { return target_[e]; }
  double edge_cost() const { return edge_cost_; }

 private:
  int state_dim_, action_dim_, horizon_;
  std::vector<int> true_support_;
  std::vector<double> target_;  // |S| * |A| entries, zero off support
  double noise_scale_;
  double edge_cost_;
  std::uint64_t seed_;
  int active_edges_ = 0;
  std::vector<double> x_;
  std::uint64_t episode_seed_ = 0;
  int t_ = 0;

  void draw_x();
};

// Adds a constant per-step survival reward on top of an inner environment.
class AliveBonusEnv : public Environment {
 public:
  AliveBonusEnv(std::unique_ptr<Environment> inner, double bonus);
  AliveBonusEnv(const AliveBonusEnv& other);

  int state_dim() const override { return inner_->state_dim(); }
  int action_dim() const override { return inner_->action_dim(); }
  int horizon() const override { return inner_->horizon(); }
  double alive_bonus_per_step() const override { return bonus_; }
  void bind_policy(const PolicyGraph& graph) override {
    inner_->bind_policy(graph);
  }
  std::vector<double> reset(std::uint64_t episode_seed) override {
    return inner_->reset(episode_seed);
  }
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<AliveBonusEnv>(*this);
  }

 private:
  std::unique_ptr<Environment> inner_;
  double bonus_;
};

// Factory keyed by run-config environment names: "lqr", "sparse_oracle".
// An "alive_bonus" param wraps the instance in AliveBonusEnv.
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const nlohmann::json& params,
                                              std::uint64_t seed);

}  // namespace esenas

#endif  // ESENAS_ENVIRONMENTS_HPP_
