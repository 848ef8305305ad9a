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

#include "esenas/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "esenas/errors.hpp"

namespace esenas {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

std::vector<double> softmax(const std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - peak);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

// Draws an index from an unnormalized weight vector.
int draw(const std::vector<double>& weights, double total, CounterRng& rng) {
  const double u = rng.next_double() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Round-off fallthrough: last positive-weight index.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

}  // namespace

void Controller::check_finite(const Feedback& feedback) {
  if (!std::isfinite(feedback.objective))
    throw NonFiniteObjective("controller feedback objective is not finite");
}

RandomController::RandomController(SearchSpaceSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed, /*stream=*/0x7a4d) {}

std::vector<Genome> RandomController::propose(int count) {
  std::vector<Genome> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(random_sample(spec_, rng_));
  return out;
}

void RandomController::observe(const Feedback& feedback) {
  check_finite(feedback);  // otherwise a no-op
}

nlohmann::json RandomController::checkpoint() const {
  return {{"kind", kind()}, {"space", spec_.space_hash_hex()}};
}

int RegEvoController::default_tournament_size(int num_workers) {
  return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(
                         std::max(num_workers, 0)))));
}

RegEvoController::RegEvoController(SearchSpaceSpec spec, int capacity,
                                   int tournament_size, std::uint64_t seed)
    : spec_(std::move(spec)),
      capacity_(capacity),
      tournament_size_(tournament_size),
      rng_(seed, /*stream=*/0x4e60) {
  if (capacity_ < 1) throw RangeError("population capacity must be >= 1");
  if (tournament_size_ < 1) throw RangeError("tournament size must be >= 1");
}

Genome RegEvoController::tournament_parent(CounterRng& rng) const {
  const int n = static_cast<int>(population_.size());
  const Member* winner = nullptr;
  for (int t = 0; t < tournament_size_; ++t) {
    const Member& candidate = population_[rng.next_int(n)];
    if (winner == nullptr || candidate.objective > winner->objective ||
        (candidate.objective == winner->objective &&
         candidate.age < winner->age)) {
      winner = &candidate;
    }
  }
  return winner->genome;
}

std::vector<Genome> RegEvoController::propose(int count) {
  std::vector<Genome> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (static_cast<int>(population_.size()) < capacity_) {
      out.push_back(random_sample(spec_, rng_));  // warm-up
    } else {
      out.push_back(mutate(tournament_parent(rng_), spec_, rng_));
    }
  }
  return out;
}

void RegEvoController::observe(const Feedback& feedback) {
  check_finite(feedback);
  validate(feedback.genome, spec_);
  population_.push_back({feedback.genome, feedback.objective, next_age_++});
  while (static_cast<int>(population_.size()) > capacity_)
    population_.pop_front();
}

double RegEvoController::progress_stat() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : population_) best = std::max(best, m.objective);
  return population_.empty() ? 0.0 : best;
}

nlohmann::json RegEvoController::checkpoint() const {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : population_) {
    members.push_back(
        {{"genome", serialize(m.genome, spec_)}, {"objective", m.objective}});
  }
  return {{"kind", kind()},
          {"capacity", capacity_},
          {"tournament_size", tournament_size_},
          {"population", std::move(members)}};
}

PGController::PGController(SearchSpaceSpec spec, double step_size,
                           int batch_size, std::uint64_t seed)
    : spec_(std::move(spec)),
      step_size_(step_size),
      batch_size_(batch_size),
      rng_(seed, /*stream=*/0x964) {
  if (batch_size_ < 1) throw RangeError("batch size must be >= 1");
  for (const auto& p : spec_.decision_points()) {
    logits_.emplace_back(p.num_alternatives, 0.0);
    adam_m_.emplace_back(p.num_alternatives, 0.0);
    adam_v_.emplace_back(p.num_alternatives, 0.0);
  }
}

void PGController::set_logits(std::vector<std::vector<double>> logits) {
  if (logits.size() != logits_.size())
    throw DimensionMismatch("logit table has wrong number of decision points");
  for (std::size_t d = 0; d < logits.size(); ++d) {
    if (logits[d].size() != logits_[d].size())
      throw DimensionMismatch("logit row has wrong arity");
  }
  logits_ = std::move(logits);
}

std::vector<double> PGController::probabilities(std::size_t d) const {
  return softmax(logits_.at(d));
}

std::vector<Genome> PGController::propose(int count) {
  std::vector<Genome> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    Genome g;
    g.space_hash = spec_.space_hash();
    g.choices.reserve(spec_.size());
    for (std::size_t d = 0; d < spec_.size(); ++d) {
      const auto& point = spec_.decision_points()[d];
      std::vector<double> p = softmax(logits_[d]);
      std::vector<int> sel;
      if (point.kind == DecisionKind::kOneOf) {
        sel.push_back(draw(p, 1.0, rng_));
      } else if (point.distinct) {
        double total = 1.0;
        for (int t = 0; t < point.k; ++t) {
          const int idx = draw(p, total, rng_);
          sel.push_back(idx);
          total -= p[idx];
          p[idx] = 0.0;  // mask out for the remaining slots
        }
        std::sort(sel.begin(), sel.end());
      } else {
        for (int t = 0; t < point.k; ++t) sel.push_back(draw(p, 1.0, rng_));
      }
      g.choices.push_back(std::move(sel));
    }
    out.push_back(std::move(g));
  }
  return out;
}

double PGController::log_prob(const Genome& genome) const {
  validate(genome, spec_);
  double total = 0.0;
  for (std::size_t d = 0; d < spec_.size(); ++d) {
    const auto& point = spec_.decision_points()[d];
    std::vector<double> p = softmax(logits_[d]);
    if (point.kind == DecisionKind::kOneOf || !point.distinct) {
      for (int idx : genome.choices[d]) total += std::log(p[idx]);
    } else {
      double mass = 1.0;
      for (int idx : genome.choices[d]) {  // canonical ascending order
        total += std::log(p[idx] / mass);
        mass -= p[idx];
        p[idx] = 0.0;
      }
    }
  }
  return total;
}

std::vector<std::vector<double>> PGController::grad_log_prob(
    const Genome& genome) const {
  validate(genome, spec_);
  std::vector<std::vector<double>> grad;
  grad.reserve(spec_.size());
  for (std::size_t d = 0; d < spec_.size(); ++d) {
    const auto& point = spec_.decision_points()[d];
    const std::vector<double> base = softmax(logits_[d]);
    std::vector<double> g(base.size(), 0.0);
    if (point.kind == DecisionKind::kOneOf || !point.distinct) {
      for (int idx : genome.choices[d]) {
        g[idx] += 1.0;
        for (std::size_t a = 0; a < base.size(); ++a) g[a] -= base[a];
      }
    } else {
      // Sequential masked draws: each slot contributes one_hot - q where q is
      // the renormalized distribution over the still-unselected alternatives.
      std::vector<double> p = base;
      double mass = 1.0;
      for (int idx : genome.choices[d]) {
        for (std::size_t a = 0; a < p.size(); ++a) {
          if (p[a] > 0.0) g[a] -= p[a] / mass;
        }
        g[idx] += 1.0;
        mass -= p[idx];
        p[idx] = 0.0;
      }
    }
    grad.push_back(std::move(g));
  }
  return grad;
}

void PGController::observe(const Feedback& feedback) {
  check_finite(feedback);
  validate(feedback.genome, spec_);
  batch_.push_back(feedback);
  if (static_cast<int>(batch_.size()) >= batch_size_) {
    std::vector<Feedback> batch;
    batch.swap(batch_);
    update(batch);
  }
}

void PGController::update(const std::vector<Feedback>& batch) {
  if (batch.empty()) throw EmptyBatch("policy-gradient update needs feedback");
  const double n = static_cast<double>(batch.size());
  double mean = 0.0;
  for (const auto& f : batch) mean += f.objective;
  mean /= n;
  double var = 0.0;
  for (const auto& f : batch) var += (f.objective - mean) * (f.objective - mean);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-12) return;  // degenerate batch: zero advantages everywhere

  std::vector<std::vector<double>> grad;
  for (const auto& row : logits_) grad.emplace_back(row.size(), 0.0);
  for (const auto& f : batch) {
    const double advantage = (f.objective - mean) / std::max(sd, 1e-8);
    const auto g = grad_log_prob(f.genome);
    for (std::size_t d = 0; d < grad.size(); ++d) {
      for (std::size_t a = 0; a < grad[d].size(); ++a)
        grad[d][a] += advantage * g[d][a] / n;
    }
  }

  // Adam ascent step.
  ++adam_t_;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_t_));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_t_));
  for (std::size_t d = 0; d < logits_.size(); ++d) {
    for (std::size_t a = 0; a < logits_[d].size(); ++a) {
      const double g = grad[d][a];
      adam_m_[d][a] = kAdamBeta1 * adam_m_[d][a] + (1.0 - kAdamBeta1) * g;
      adam_v_[d][a] = kAdamBeta2 * adam_v_[d][a] + (1.0 - kAdamBeta2) * g * g;
      const double m_hat = adam_m_[d][a] / bc1;
      const double v_hat = adam_v_[d][a] / bc2;
      logits_[d][a] += step_size_ * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
  }
}

double PGController::progress_stat() const {
  if (logits_.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t d = 0; d < logits_.size(); ++d) {
    const auto p = softmax(logits_[d]);
    double h = 0.0;
    for (double v : p) {
      if (v > 0.0) h -= v * std::log(v);
    }
    total += h;
  }
  return total / static_cast<double>(logits_.size());
}

nlohmann::json PGController::checkpoint() const {
  return {{"kind", kind()},
          {"step_size", step_size_},
          {"batch_size", batch_size_},
          {"logits", logits_},
          {"adam_step", adam_t_}};
}

std::unique_ptr<Controller> make_controller(const nlohmann::json& config,
                                            const SearchSpaceSpec& spec,
                                            int num_workers,
                                            std::uint64_t seed) {
  const std::string kind = config.value("kind", "");
  if (kind == "random") return std::make_unique<RandomController>(spec, seed);
  if (kind == "regularized_evolution") {
    const int capacity = config.value("capacity", 100);
    const int tournament = config.value(
        "tournament_size", RegEvoController::default_tournament_size(num_workers));
    return std::make_unique<RegEvoController>(spec, capacity, tournament, seed);
  }
  if (kind == "policy_gradient") {
    return std::make_unique<PGController>(spec, config.value("step_size", 0.001),
                                          config.value("batch_size", 64), seed);
  }
  throw ConfigError("unknown controller kind '" + kind + "'");
}

}  // namespace esenas
