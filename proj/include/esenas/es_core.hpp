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

#ifndef ESENAS_ES_CORE_HPP_
#define ESENAS_ES_CORE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esenas/controller.hpp"
#include "esenas/distributed.hpp"
#include "esenas/normalizer.hpp"
#include "esenas/search_space.hpp"

namespace esenas {

struct ESConfig {
  double sigma = 0.1;
  double step_size = 0.01;
  int num_distinct_perturbations = 50;
  int num_eval_workers = 50;
  std::optional<int> controller_feedback_k;  // subsample controller feedback
  std::optional<int> edge_target;            // hybrid multiobjective E_T
  int iterations = 0;

  // n = 2 * distinct + eval: each perturbation is evaluated antithetically.
  int num_workers() const {
    return 2 * num_distinct_perturbations + num_eval_workers;
  }
  void validate() const;
};

struct ESState {
  std::vector<double> theta;
  RunningNormalizer normalizer;
  int iteration = 0;
};

// Stateless seed derivation so the aggregator and any re-dispatched worker
// agree on direction i of iteration `iteration` without shared RNG state.
std::uint64_t perturbation_seed(std::uint64_t master_seed, int iteration,
                                int index);

// num_distinct perturbation seeds for one iteration; directions are
// reconstructed on demand via gaussian_vector(seed, d).
std::vector<std::uint64_t> sample_perturbations(std::uint64_t master_seed,
                                                int iteration,
                                                int num_distinct);

// (1 / (sigma * n)) * sum_i v_i * g_i with v_i = (f_i^+ - f_i^-) / 2.
std::vector<double> es_gradient(std::span<const double> vs,
                                const std::vector<std::vector<double>>& gs,
                                double sigma);

// theta' = theta + (eta / max(reward_std, 1e-8)) * gradient.
std::vector<double> weight_update(std::span<const double> theta,
                                  std::span<const double> gradient, double eta,
                                  double reward_std);

// Population standard deviation of the v_i batch.
double reward_std(std::span<const double> vs);

// Controller-side budget penalty: identity while E_m <= E_T, otherwise the
// objective shrinks (or, for negative f, grows in magnitude) by E_m / E_T.
double hybrid_objective(double f, int num_edges, int edge_target);

// Uniform subset of size k without replacement, original order preserved.
std::vector<Feedback> subsample_feedback(const std::vector<Feedback>& results,
                                         int k, CounterRng& rng);

struct IterationLog {
  int iteration = 0;
  double mean_eval_reward = 0.0;
  double max_eval_reward = 0.0;
  double min_eval_reward = 0.0;
  double mean_v = 0.0;
  double mean_edge_count = 0.0;
  double controller_stat = 0.0;
  int failed = 0;
  std::string best_genome;     // highest eval objective this iteration
  double best_objective = 0.0;

  nlohmann::json to_json() const;
};

// The ES-ENAS outer loop: one aggregator thread owning theta and the
// controller, evaluations delegated to a Backend.
class EsEnasRunner {
 public:
  EsEnasRunner(ESConfig config, WorkerContext ctx,
               std::unique_ptr<Controller> controller,
               std::unique_ptr<Backend> backend, std::uint64_t master_seed);

  IterationLog iteration();

  const ESState& state() const { return state_; }
  const Controller& controller() const { return *controller_; }
  Controller& controller() { return *controller_; }
  const WorkerContext& context() const { return ctx_; }
  const ESConfig& config() const { return config_; }

  // All genomes proposed so far, for edge-frequency reports.
  const std::vector<Genome>& proposal_history() const { return proposals_; }

 private:
  ESConfig config_;
  WorkerContext ctx_;
  std::unique_ptr<Controller> controller_;
  std::unique_ptr<Backend> backend_;
  std::uint64_t master_seed_;
  ESState state_;
  CounterRng subsample_rng_;
  std::vector<Genome> proposals_;
};

}  // namespace esenas

#endif  // ESENAS_ES_CORE_HPP_
