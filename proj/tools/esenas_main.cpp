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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esenas/errors.hpp"
#include "esenas/experiment.hpp"

namespace {

using esenas::RunConfig;

// Doubles rendered via JSON for byte-stable report output.
std::string fmt(double x) { return nlohmann::json(x).dump(); }

void write_or_print(const std::string& out_dir, const std::string& filename,
                    const std::string& content) {
  if (out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) / filename);
  out << content;
}

RunConfig load_config(const std::string& path, long long seed_override,
                      int workers, const std::string& backend,
                      const std::string& out_dir) {
  RunConfig config = RunConfig::from_file(path);
  if (seed_override >= 0)
    config.seeds = {static_cast<std::uint64_t>(seed_override)};
  if (workers > 0) config.workers = workers;
  if (!backend.empty()) config.backend = backend;
  if (!out_dir.empty()) config.out_dir = out_dir;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ES-ENAS: evolution strategies with architecture search"};
  app.require_subcommand(1);

  std::string config_path;
  long long seed_override = -1;
  int workers = 0;
  std::string backend;
  std::string out_dir;
  std::string genomes_path;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config_path, "run config JSON");
    if (config_required) opt->required();
    cmd->add_option("--seed-override", seed_override,
                    "run a single seed instead of the config's list");
    cmd->add_option("--workers", workers, "worker thread/process count");
    cmd->add_option("--backend", backend, "threads | process | tcp")
        ->check(CLI::IsMember({"threads", "process", "tcp", "serial"}));
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run the ES-ENAS loop");
  add_common(run_cmd, /*config_required=*/true);

  CLI::App* edges_cmd = app.add_subcommand(
      "report-edges", "per-edge selection frequencies from a genome log");
  add_common(edges_cmd, /*config_required=*/true);
  edges_cmd->add_option("--genomes", genomes_path,
                        "file with one serialized genome per line")
      ->required();

  CLI::App* accounting_cmd = app.add_subcommand(
      "report-accounting", "parameter/compression/bit accounting table");
  accounting_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* oracle_cmd = app.add_subcommand(
      "enumerate-oracle", "brute-force ranking of a small edge-pruning space");
  add_common(oracle_cmd, /*config_required=*/true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const RunConfig config =
          load_config(config_path, seed_override, workers, backend, out_dir);
      return esenas::run(config);
    }

    if (edges_cmd->parsed()) {
      const RunConfig config =
          load_config(config_path, seed_override, workers, backend, out_dir);
      const esenas::SearchSpaceSpec spec = esenas::make_search_space(
          esenas::coding_from_json(config.coding), config.dims);
      std::ifstream in(genomes_path);
      if (!in) throw esenas::ConfigError("cannot open " + genomes_path);
      std::vector<esenas::Genome> genomes;
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) genomes.push_back(esenas::deserialize(line, spec));
      }
      std::string csv = "edge,p,color\n";
      for (const auto& row : esenas::edge_frequency_report(genomes, spec))
        csv += row.label + "," + fmt(row.p) + "," + fmt(row.color) + "\n";
      write_or_print(out_dir, "edges.csv", csv);
      return 0;
    }

    if (accounting_cmd->parsed()) {
      write_or_print(out_dir, "accounting.csv",
                     esenas::accounting_table(esenas::reference_envs(),
                                              esenas::reference_codings()));
      return 0;
    }

    if (oracle_cmd->parsed()) {
      const RunConfig config =
          load_config(config_path, seed_override, workers, backend, out_dir);
      const std::uint64_t seed =
          seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                             : config.seeds.front();
      std::string out;
      for (const auto& entry : esenas::enumerate_oracle(
               config.environment, config.coding, config.dims, seed)) {
        nlohmann::json row = {{"genome", entry.genome_text},
                              {"score", entry.score}};
        out += row.dump() + "\n";
      }
      write_or_print(out_dir, "oracle.jsonl", out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
