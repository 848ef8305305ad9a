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

#ifndef ESENAS_EXPERIMENT_HPP_
#define ESENAS_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esenas/es_core.hpp"
#include "esenas/policy.hpp"

namespace esenas {

// One experiment: environment x coding x controller x ES hyperparameters,
// repeated over seeds.
struct RunConfig {
  nlohmann::json environment;  // {"name":..., "params":{...}}
  nlohmann::json coding;
  Dims dims{0, 0};
  nlohmann::json controller;  // {"kind":..., ...}
  ESConfig es;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::string out_dir = ".";
  std::string backend = "threads";
  int workers = 0;  // 0 = one thread/process per ES worker slot

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::string& path);
};

struct SeedRunResult {
  std::uint64_t seed = 0;
  std::vector<IterationLog> logs;
  double final_eval_reward = 0.0;
  double best_objective = 0.0;
  std::string best_genome;
  nlohmann::json controller_checkpoint;
};

// One seed of the loop, no files written.
SeedRunResult run_seed(const RunConfig& config, std::uint64_t seed);

// Full experiment: per-seed JSONL logs, summary.csv, controller checkpoints
// and a best-genome export under config.out_dir. Returns a process exit code.
int run(const RunConfig& config);

struct EdgeFrequency {
  std::string label;
  double p = 0.0;      // selection frequency across genomes
  double color = 0.0;  // 2 * |p - 1/2|
};

// Per-edge selection frequencies over a genome sample. Works for boolean
// edge points (ONE_OF(2)) and fixed-size MANY_OF edge sets.
std::vector<EdgeFrequency> edge_frequency_report(
    const std::vector<Genome>& genomes, const SearchSpaceSpec& spec);

struct OracleEntry {
  Genome genome;
  std::string genome_text;
  double score = 0.0;  // expected episode reward under ideal weights
};

// Brute-force ranking of every genome of a small edge-pruning space on the
// sparse-oracle environment, best first. Scores are the analytic expected
// episode rewards with ideal weights, so the top entry is the global optimum.
std::vector<OracleEntry> enumerate_oracle(const nlohmann::json& environment,
                                          const nlohmann::json& coding,
                                          const Dims& dims, std::uint64_t seed,
                                          std::uint64_t limit = 1u << 20);

// CSV of (env, coding, # weights, compression %, # bits) rows.
std::string accounting_table(
    const std::vector<std::pair<std::string, Dims>>& envs,
    const std::vector<WeightCoding>& codings, int baseline_hidden = 41);

// The four environments of the reference accounting table.
std::vector<std::pair<std::string, Dims>> reference_envs();
// The five reference codings at hidden width 41 (32 for edge pruning).
std::vector<WeightCoding> reference_codings();

}  // namespace esenas

#endif  // ESENAS_EXPERIMENT_HPP_
