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

#include "esenas/es_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esenas/errors.hpp"
#include "esenas/policy.hpp"
#include "esenas/rng.hpp"

namespace esenas {
namespace {

constexpr std::uint64_t kSubsampleStream = 0x5ab5a3f1e7357ULL;

}  // namespace

void ESConfig::validate() const {
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (step_size <= 0.0) throw ConfigError("step_size must be positive");
  if (num_distinct_perturbations < 1)
    throw ConfigError("need at least one perturbation");
  if (num_eval_workers < 0) throw ConfigError("num_eval_workers must be >= 0");
  if (controller_feedback_k && *controller_feedback_k < 1)
    throw ConfigError("controller_feedback_k must be positive");
  if (edge_target && *edge_target < 1)
    throw ConfigError("edge_target must be >= 1");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
}

std::uint64_t perturbation_seed(std::uint64_t master_seed, int iteration,
                                int index) {
  return mix_seeds(mix_seeds(master_seed, static_cast<std::uint64_t>(iteration)),
                   static_cast<std::uint64_t>(index));
}

std::vector<std::uint64_t> sample_perturbations(std::uint64_t master_seed,
                                                int iteration,
                                                int num_distinct) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(num_distinct));
  for (int i = 0; i < num_distinct; ++i)
    seeds[static_cast<std::size_t>(i)] = perturbation_seed(master_seed, iteration, i);
  return seeds;
}

std::vector<double> es_gradient(std::span<const double> vs,
                                const std::vector<std::vector<double>>& gs,
                                double sigma) {
  if (vs.empty()) throw EmptyBatch("es_gradient needs at least one pair");
  if (vs.size() != gs.size())
    throw DimensionMismatch("es_gradient: |v| != |g|");
  const std::size_t d = gs[0].size();
  std::vector<double> grad(d, 0.0);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (gs[i].size() != d) throw DimensionMismatch("ragged direction batch");
    for (std::size_t j = 0; j < d; ++j) grad[j] += vs[i] * gs[i][j];
  }
  const double scale = 1.0 / (sigma * static_cast<double>(vs.size()));
  for (auto& x : grad) x *= scale;
  return grad;
}

std::vector<double> weight_update(std::span<const double> theta,
                                  std::span<const double> gradient, double eta,
                                  double rstd) {
  if (theta.size() != gradient.size())
    throw DimensionMismatch("weight_update: |theta| != |gradient|");
  const double scale = eta / std::max(rstd, 1e-8);
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += scale * gradient[i];
    if (!std::isfinite(out[i])) throw NonFiniteUpdate("non-finite weight");
  }
  return out;
}

double reward_std(std::span<const double> vs) {
  if (vs.empty()) return 0.0;
  double mean = 0.0;
  for (double v : vs) mean += v;
  mean /= static_cast<double>(vs.size());
  double var = 0.0;
  for (double v : vs) var += (v - mean) * (v - mean);
  var /= static_cast<double>(vs.size());
  return std::sqrt(var);
}

double hybrid_objective(double f, int num_edges, int edge_target) {
  if (edge_target < 1) throw RangeError("edge_target must be >= 1");
  if (num_edges < 0) throw RangeError("num_edges must be >= 0");
  if (num_edges <= edge_target) return f;
  const double ratio =
      static_cast<double>(num_edges) / static_cast<double>(edge_target);
  // The penalty must worsen the objective for either sign of f.
  const double omega = f >= 0.0 ? -1.0 : 1.0;
  return f * std::pow(ratio, omega);
}

std::vector<Feedback> subsample_feedback(const std::vector<Feedback>& results,
                                         int k, CounterRng& rng) {
  if (k < 1 || static_cast<std::size_t>(k) > results.size())
    throw RangeError("subsample size out of range");
  if (static_cast<std::size_t>(k) == results.size()) return results;
  // Partial Fisher-Yates over indices, then original order restored.
  std::vector<std::size_t> idx(results.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        static_cast<std::size_t>(rng.next_int(
            static_cast<int>(idx.size() - static_cast<std::size_t>(i))));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  std::vector<Feedback> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(results[i]);
  return out;
}

nlohmann::json IterationLog::to_json() const {
  return {{"iteration", iteration},
          {"mean_eval_reward", mean_eval_reward},
          {"max_eval_reward", max_eval_reward},
          {"min_eval_reward", min_eval_reward},
          {"mean_v", mean_v},
          {"mean_edge_count", mean_edge_count},
          {"controller_stat", controller_stat},
          {"failed", failed},
          {"best_genome", best_genome},
          {"best_objective", best_objective}};
}

EsEnasRunner::EsEnasRunner(ESConfig config, WorkerContext ctx,
                           std::unique_ptr<Controller> controller,
                           std::unique_ptr<Backend> backend,
                           std::uint64_t master_seed)
    : config_(config),
      ctx_(std::move(ctx)),
      controller_(std::move(controller)),
      backend_(std::move(backend)),
      master_seed_(master_seed),
      subsample_rng_(mix_seeds(master_seed, kSubsampleStream)) {
  config_.validate();
  state_.theta.assign(
      static_cast<std::size_t>(trainable_parameter_count(ctx_.coding, ctx_.dims)),
      0.0);
  state_.normalizer = RunningNormalizer(static_cast<std::size_t>(ctx_.dims.state_dim));
}

IterationLog EsEnasRunner::iteration() {
  const int iter = state_.iteration;
  const int P = config_.num_distinct_perturbations;
  const int E = config_.num_eval_workers;
  const auto seeds = sample_perturbations(master_seed_, iter, P);

  const std::vector<Genome> genomes = controller_->propose(2 * P + E);
  proposals_.insert(proposals_.end(), genomes.begin(), genomes.end());

  std::vector<EvalRequest> requests;
  requests.reserve(static_cast<std::size_t>(2 * P + E));
  int request_id = 0;
  for (int i = 0; i < P; ++i) {
    for (const int sign : {+1, -1}) {
      EvalRequest req;
      req.iteration = iter;
      req.request_id = request_id++;
      req.genome = serialize(genomes[static_cast<std::size_t>(
                                 2 * i + (sign > 0 ? 0 : 1))],
                             ctx_.spec());
      req.theta_version = iter;
      req.perturbation_seed = seeds[static_cast<std::size_t>(i)];
      req.sign = sign;
      req.role = RequestRole::kPerturbed;
      requests.push_back(std::move(req));
    }
  }
  for (int j = 0; j < E; ++j) {
    EvalRequest req;
    req.iteration = iter;
    req.request_id = request_id++;
    req.genome = serialize(genomes[static_cast<std::size_t>(2 * P + j)], ctx_.spec());
    req.theta_version = iter;
    req.sign = 0;
    req.role = RequestRole::kEval;
    requests.push_back(std::move(req));
  }

  ThetaSnapshot snapshot;
  snapshot.version = iter;
  snapshot.sigma = config_.sigma;
  snapshot.theta = state_.theta;
  snapshot.normalizer = state_.normalizer;

  const std::vector<EvalResult> results = backend_->dispatch(requests, snapshot);
  if (results.size() != requests.size())
    throw Error("backend returned wrong result count");

  IterationLog log;
  log.iteration = iter;

  // Gradient batch: both antithetic halves must be OK or the pair is dropped,
  // from the gradient and from the controller feedback alike.
  std::vector<double> vs;
  std::vector<std::vector<double>> gs;
  std::vector<Feedback> feedback;
  for (int i = 0; i < P; ++i) {
    const EvalResult& plus = results[static_cast<std::size_t>(2 * i)];
    const EvalResult& minus = results[static_cast<std::size_t>(2 * i + 1)];
    if (plus.status != ResultStatus::kOk || minus.status != ResultStatus::kOk) {
      log.failed += (plus.status != ResultStatus::kOk) +
                    (minus.status != ResultStatus::kOk);
      continue;
    }
    vs.push_back(0.5 * (plus.objective - minus.objective));
    gs.push_back(gaussian_vector(seeds[static_cast<std::size_t>(i)],
                                 state_.theta.size()));
    feedback.push_back({genomes[static_cast<std::size_t>(2 * i)],
                        plus.objective, iter});
    feedback.push_back({genomes[static_cast<std::size_t>(2 * i + 1)],
                        minus.objective, iter});
    state_.normalizer.merge(RunningNormalizer::from_moments(
        plus.norm_count, plus.norm_mean, plus.norm_m2));
    state_.normalizer.merge(RunningNormalizer::from_moments(
        minus.norm_count, minus.norm_mean, minus.norm_m2));
  }

  double eval_sum = 0.0;
  int eval_n = 0;
  log.max_eval_reward = -std::numeric_limits<double>::infinity();
  log.min_eval_reward = std::numeric_limits<double>::infinity();
  log.best_objective = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < E; ++j) {
    const EvalResult& r = results[static_cast<std::size_t>(2 * P + j)];
    const Genome& genome = genomes[static_cast<std::size_t>(2 * P + j)];
    if (r.status != ResultStatus::kOk) {
      ++log.failed;
      continue;
    }
    feedback.push_back({genome, r.objective, iter});
    eval_sum += r.eval_objective;
    ++eval_n;
    log.max_eval_reward = std::max(log.max_eval_reward, r.eval_objective);
    log.min_eval_reward = std::min(log.min_eval_reward, r.eval_objective);
    if (r.eval_objective > log.best_objective) {
      log.best_objective = r.eval_objective;
      log.best_genome = serialize(genome, ctx_.spec());
    }
  }
  log.mean_eval_reward = eval_n > 0 ? eval_sum / eval_n : 0.0;
  if (eval_n == 0) {
    log.max_eval_reward = log.min_eval_reward = 0.0;
    log.best_objective = 0.0;
  }

  if (!vs.empty()) {
    const std::vector<double> grad = es_gradient(vs, gs, config_.sigma);
    state_.theta =
        weight_update(state_.theta, grad, config_.step_size, reward_std(vs));
    double v_sum = 0.0;
    for (double v : vs) v_sum += v;
    log.mean_v = v_sum / static_cast<double>(vs.size());
  }

  if (config_.controller_feedback_k &&
      static_cast<std::size_t>(*config_.controller_feedback_k) < feedback.size()) {
    feedback = subsample_feedback(feedback, *config_.controller_feedback_k,
                                  subsample_rng_);
  }
  for (auto& fb : feedback) {
    if (config_.edge_target) {
      fb.objective = hybrid_objective(
          fb.objective, genome_edge_count(fb.genome, ctx_.coding, ctx_.dims),
          *config_.edge_target);
    }
    controller_->observe(fb);
  }

  double edge_sum = 0.0;
  for (const Genome& g : genomes)
    edge_sum += genome_edge_count(g, ctx_.coding, ctx_.dims);
  log.mean_edge_count = edge_sum / static_cast<double>(genomes.size());
  log.controller_stat = controller_->progress_stat();

  ++state_.iteration;
  return log;
}

}  // namespace esenas
