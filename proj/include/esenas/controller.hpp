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

#ifndef ESENAS_CONTROLLER_HPP_
#define ESENAS_CONTROLLER_HPP_

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esenas/search_space.hpp"

namespace esenas {

struct Feedback {
  Genome genome;
  double objective = 0.0;
  int iteration = 0;
};

// The model-proposing side of the loop. Implementations share one contract:
// propose genomes, observe evaluated objectives, no other coupling to the
// weight optimizer.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual std::vector<Genome> propose(int count) = 0;
  virtual void observe(const Feedback& feedback) = 0;

  virtual std::string kind() const = 0;
  // Scalar progress statistic for the iteration log (controller-specific).
  virtual double progress_stat() const { return 0.0; }
  virtual nlohmann::json checkpoint() const = 0;

 protected:
  static void check_finite(const Feedback& feedback);
};

class RandomController : public Controller {
 public:
  RandomController(SearchSpaceSpec spec, std::uint64_t seed);

  std::vector<Genome> propose(int count) override;
  void observe(const Feedback& feedback) override;
  std::string kind() const override { return "random"; }
  nlohmann::json checkpoint() const override;

 private:
  SearchSpaceSpec spec_;
  CounterRng rng_;
};

// Regularized Evolution: a fixed-capacity FIFO population; proposals mutate
// the winner of a uniformly sampled tournament once warm-up is over.
class RegEvoController : public Controller {
 public:
  RegEvoController(SearchSpaceSpec spec, int capacity, int tournament_size,
                   std::uint64_t seed);

  std::vector<Genome> propose(int count) override;
  void observe(const Feedback& feedback) override;
  std::string kind() const override { return "regularized_evolution"; }
  // Best objective currently in the population.
  double progress_stat() const override;
  nlohmann::json checkpoint() const override;

  struct Member {
    Genome genome;
    double objective = 0.0;
    std::uint64_t age = 0;  // insertion order; lower = older
  };
  const std::deque<Member>& population() const { return population_; }
  int capacity() const { return capacity_; }
  int tournament_size() const { return tournament_size_; }

  static int default_tournament_size(int num_workers);

 private:
  Genome tournament_parent(CounterRng& rng) const;

  SearchSpaceSpec spec_;
  int capacity_;
  int tournament_size_;
  CounterRng rng_;
  std::deque<Member> population_;
  std::uint64_t next_age_ = 0;
};

// Factorized categorical policy-gradient controller: one logit vector per
// decision point, REINFORCE with batch advantage normalization, adaptive
// moment steps. MANY_OF distinct points sample by sequential renormalized
// draws with chosen alternatives masked out.
class PGController : public Controller {
 public:
  PGController(SearchSpaceSpec spec, double step_size = 0.001,
               int batch_size = 64, std::uint64_t seed = 0);

  std::vector<Genome> propose(int count) override;
  void observe(const Feedback& feedback) override;
  std::string kind() const override { return "policy_gradient"; }
  // Mean per-decision-point entropy of the factorized distribution.
  double progress_stat() const override;
  nlohmann::json checkpoint() const override;

  // Log-likelihood of a genome under the current logits (distinct MANY_OF
  // factorized sequentially in canonical ascending order).
  double log_prob(const Genome& genome) const;
  // d log_prob / d logits, same shape as the logit table.
  std::vector<std::vector<double>> grad_log_prob(const Genome& genome) const;

  const std::vector<std::vector<double>>& logits() const { return logits_; }
  // Checkpoint restore; shape must match the space.
  void set_logits(std::vector<std::vector<double>> logits);
  std::vector<double> probabilities(std::size_t decision_point) const;
  int batch_size() const { return batch_size_; }
  std::size_t pending_feedback() const { return batch_.size(); }

  // One REINFORCE step from a full batch. Degenerate batches (all objectives
  // equal) are a no-op.
  void update(const std::vector<Feedback>& batch);

 private:
  SearchSpaceSpec spec_;
  double step_size_;
  int batch_size_;
  CounterRng rng_;
  std::vector<std::vector<double>> logits_;
  std::vector<std::vector<double>> adam_m_, adam_v_;
  long long adam_t_ = 0;
  std::vector<Feedback> batch_;
};

// Builds a controller from a run-config fragment, e.g.
//   {"kind":"regularized_evolution","capacity":100,"tournament_size":12}
std::unique_ptr<Controller> make_controller(const nlohmann::json& config,
                                            const SearchSpaceSpec& spec,
                                            int num_workers,
                                            std::uint64_t seed);

}  // namespace esenas

#endif  // ESENAS_CONTROLLER_HPP_
