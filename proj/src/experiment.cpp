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

#include "esenas/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "esenas/errors.hpp"

namespace esenas {
namespace {

constexpr std::uint64_t kControllerStream = 0xc047011e4ULL;

// Doubles rendered via the JSON shortest-roundtrip formatter so every
// artifact is byte-stable across runs.
std::string fmt(double x) { return nlohmann::json(x).dump(); }

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  RunConfig config;
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  if (!doc.contains("environment") || !doc.contains("coding") ||
      !doc.contains("dims") || !doc.contains("controller"))
    throw ConfigError("run config needs environment, coding, dims, controller");
  config.environment = doc["environment"];
  if (!config.environment.contains("name"))
    throw ConfigError("environment needs a name");
  config.coding = doc["coding"];
  coding_from_json(config.coding);  // validates the kind early
  config.dims = dims_from_json(doc["dims"]);
  config.controller = doc["controller"];

  const nlohmann::json es = doc.value("es", nlohmann::json::object());
  config.es.sigma = es.value("sigma", 0.1);
  config.es.step_size = es.value("step_size", 0.01);
  config.es.num_distinct_perturbations =
      es.value("num_distinct_perturbations", 50);
  config.es.num_eval_workers = es.value("num_eval_workers", 50);
  if (es.contains("controller_feedback_k"))
    config.es.controller_feedback_k = es["controller_feedback_k"].get<int>();
  if (es.contains("edge_target"))
    config.es.edge_target = es["edge_target"].get<int>();
  config.es.iterations = es.value("iterations", 0);
  config.es.validate();

  config.seeds = doc.value("seeds", std::vector<std::uint64_t>{0, 1, 2});
  if (config.seeds.empty()) throw ConfigError("seeds must be nonempty");
  config.out_dir = doc.value("out_dir", std::string("."));
  config.backend = doc.value("backend", std::string("threads"));
  config.workers = doc.value("workers", 0);
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(doc);
}

SeedRunResult run_seed(const RunConfig& config, std::uint64_t seed) {
  nlohmann::json env_doc = config.environment;
  env_doc["seed"] = seed;
  WorkerContext ctx =
      WorkerContext::from_json(env_doc, config.coding,
                               dims_to_json(config.dims));
  auto controller = make_controller(config.controller, ctx.spec(),
                                    config.es.num_workers(),
                                    mix_seeds(seed, kControllerStream));
  const int workers =
      config.workers > 0 ? config.workers : config.es.num_workers();
  auto backend = make_backend(config.backend, ctx, workers);
  EsEnasRunner runner(config.es, ctx, std::move(controller),
                      std::move(backend), seed);

  SeedRunResult result;
  result.seed = seed;
  result.best_objective = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.es.iterations; ++it) {
    IterationLog log = runner.iteration();
    if (!log.best_genome.empty() && log.best_objective > result.best_objective) {
      result.best_objective = log.best_objective;
      result.best_genome = log.best_genome;
    }
    result.final_eval_reward = log.mean_eval_reward;
    result.logs.push_back(std::move(log));
  }
  if (result.best_genome.empty()) result.best_objective = 0.0;
  result.controller_checkpoint = runner.controller().checkpoint();
  return result;
}

int run(const RunConfig& config) {
  namespace fs = std::filesystem;
  try {
    fs::create_directories(config.out_dir);
    std::vector<SeedRunResult> per_seed;
    for (std::uint64_t seed : config.seeds) {
      SeedRunResult result = run_seed(config, seed);

      std::ofstream log_out(fs::path(config.out_dir) /
                            ("seed_" + std::to_string(seed) + ".jsonl"));
      for (const IterationLog& log : result.logs)
        log_out << log.to_json().dump() << "\n";

      std::ofstream ckpt_out(fs::path(config.out_dir) /
                             ("controller_seed_" + std::to_string(seed) +
                              ".json"));
      ckpt_out << result.controller_checkpoint.dump() << "\n";

      per_seed.push_back(std::move(result));
    }

    double mean = 0.0;
    for (const auto& r : per_seed) mean += r.final_eval_reward;
    mean /= static_cast<double>(per_seed.size());
    double var = 0.0;
    for (const auto& r : per_seed) {
      const double d = r.final_eval_reward - mean;
      var += d * d;
    }
    var /= static_cast<double>(per_seed.size());

    std::ofstream csv(fs::path(config.out_dir) / "summary.csv");
    csv << "seed,final_eval_reward,best_objective\n";
    for (const auto& r : per_seed) {
      csv << r.seed << "," << fmt(r.final_eval_reward) << ","
          << fmt(r.best_objective) << "\n";
    }
    csv << "aggregate," << fmt(mean) << "," << fmt(std::sqrt(var)) << "\n";

    const auto best = std::max_element(
        per_seed.begin(), per_seed.end(), [](const auto& a, const auto& b) {
          return a.best_objective < b.best_objective;
        });
    nlohmann::json best_doc = {{"seed", best->seed},
                               {"objective", best->best_objective},
                               {"genome", best->best_genome}};
    std::ofstream best_out(fs::path(config.out_dir) / "best_genome.json");
    best_out << best_doc.dump() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

std::vector<EdgeFrequency> edge_frequency_report(
    const std::vector<Genome>& genomes, const SearchSpaceSpec& spec) {
  if (genomes.empty()) throw EmptyBatch("no genomes to report on");
  for (const Genome& g : genomes) {
    if (g.space_hash != spec.space_hash())
      throw SpaceMismatch("genome from a different search space");
  }

  std::vector<EdgeFrequency> report;
  const double n = static_cast<double>(genomes.size());
  const auto& points = spec.decision_points();
  for (std::size_t d = 0; d < points.size(); ++d) {
    const DecisionPoint& point = points[d];
    if (point.kind == DecisionKind::kManyOf) {
      std::vector<int> counts(static_cast<std::size_t>(point.num_alternatives), 0);
      for (const Genome& g : genomes) {
        for (int alt : g.choices[d]) ++counts[static_cast<std::size_t>(alt)];
      }
      for (int alt = 0; alt < point.num_alternatives; ++alt) {
        const double p = counts[static_cast<std::size_t>(alt)] / n;
        report.push_back({point.label + "[" + std::to_string(alt) + "]", p,
                          2.0 * std::abs(p - 0.5)});
      }
    } else if (point.num_alternatives == 2 &&
               point.label.rfind("edge", 0) == 0) {
      int count = 0;
      for (const Genome& g : genomes) count += g.choices[d][0];
      const double p = count / n;
      report.push_back({point.label, p, 2.0 * std::abs(p - 0.5)});
    }
  }
  if (report.empty())
    throw SpaceMismatch("search space has no edge decision points");
  return report;
}

namespace {

// Candidate-edge indices a genome selects, for linear edge-pruning codings.
std::vector<int> selected_edge_indices(const Genome& genome,
                                       const WeightCoding& coding,
                                       const SearchSpaceSpec& spec) {
  std::vector<int> selected;
  if (coding.boolean_mode) {
    const auto& points = spec.decision_points();
    for (std::size_t d = 0; d < points.size(); ++d) {
      if (points[d].label.rfind("edge", 0) != 0) continue;
      if (genome.choices[d][0] == 1) selected.push_back(static_cast<int>(d));
    }
  } else {
    selected = genome.choices[0];
  }
  return selected;
}

}  // namespace

std::vector<OracleEntry> enumerate_oracle(const nlohmann::json& environment,
                                          const nlohmann::json& coding_doc,
                                          const Dims& dims, std::uint64_t seed,
                                          std::uint64_t limit) {
  if (environment.at("name").get<std::string>() != "sparse_oracle")
    throw ConfigError("enumerate-oracle needs a sparse_oracle environment");
  const WeightCoding coding = coding_from_json(coding_doc);
  if (coding.kind != CodingKind::kEdgePruning || !coding.hidden_sizes.empty())
    throw ConfigError("enumerate-oracle needs a linear edge-pruning coding");

  nlohmann::json env_doc = environment;
  env_doc["seed"] = seed;
  WorkerContext ctx = WorkerContext::from_json(env_doc, coding_doc,
                                               dims_to_json(dims));
  const auto* oracle = dynamic_cast<const SparseOracleEnv*>(ctx.env.get());
  if (oracle == nullptr)
    throw ConfigError("enumerate-oracle needs an unwrapped sparse_oracle");

  // With ideal weights, every selected support edge contributes no residual
  // and every missing support edge e costs E[(w_e x)^2] = w_e^2 per step.
  std::vector<OracleEntry> entries;
  for (const Genome& genome : enumerate_all(ctx.spec(), limit)) {
    const std::vector<int> selected =
        selected_edge_indices(genome, coding, ctx.spec());
    double per_step = -oracle->edge_cost() * static_cast<double>(selected.size());
    for (int e : oracle->true_support()) {
      if (!std::binary_search(selected.begin(), selected.end(), e)) {
        const double w = oracle->target_weight(e);
        per_step -= w * w;
      }
    }
    OracleEntry entry;
    entry.genome = genome;
    entry.genome_text = serialize(genome, ctx.spec());
    entry.score = per_step * oracle->horizon();
    entries.push_back(std::move(entry));
  }
  std::sort(entries.begin(), entries.end(),
            [](const OracleEntry& a, const OracleEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.genome_text < b.genome_text;
            });
  return entries;
}

std::vector<std::pair<std::string, Dims>> reference_envs() {
  return {{"Striker", {23, 7}},
          {"HalfCheetah", {17, 6}},
          {"Hopper", {11, 3}},
          {"Walker2d", {17, 6}}};
}

std::vector<WeightCoding> reference_codings() {
  WeightCoding toeplitz{CodingKind::kToeplitz, {41}};
  WeightCoding circulant{CodingKind::kCirculant, {41}};
  WeightCoding unstructured{CodingKind::kUnstructured, {41}};
  WeightCoding sharing{CodingKind::kWeightSharing, {41}};  // colors per-env
  WeightCoding pruning{CodingKind::kEdgePruning, {32}};
  pruning.num_edges = 64;
  return {toeplitz, circulant, unstructured, sharing, pruning};
}

std::string accounting_table(
    const std::vector<std::pair<std::string, Dims>>& envs,
    const std::vector<WeightCoding>& codings, int baseline_hidden) {
  std::ostringstream csv;
  csv << "env,coding,weights,compression_pct,bits\n";
  for (const auto& [name, dims] : envs) {
    for (const WeightCoding& base : codings) {
      WeightCoding coding = base;
      if (coding.kind == CodingKind::kWeightSharing && coding.num_colors == 0)
        coding.num_colors = std::max(dims.state_dim, dims.action_dim);
      const ParamAccount account = param_accounting(coding, dims, baseline_hidden);
      csv << name << "," << coding_kind_name(coding.kind) << ","
          << account.weight_params << "," << fmt(account.compression_pct)
          << "," << account.bit_count << "\n";
    }
  }
  return csv.str();
}

}  // namespace esenas
