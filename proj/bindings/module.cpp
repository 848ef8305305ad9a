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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "esenas/es_core.hpp"
#include "esenas/experiment.hpp"
#include "esenas/policy.hpp"
#include "esenas/rng.hpp"

namespace py = pybind11;

namespace {

nlohmann::json parse(const std::string& text) {
  return nlohmann::json::parse(text);
}

}  // namespace

PYBIND11_MODULE(_esenas, m) {
  m.doc() = "ES-ENAS: joint evolution-strategies weight training and "
            "combinatorial architecture search";

  m.def("gaussian_vector", &esenas::gaussian_vector, py::arg("seed"),
        py::arg("dim"), "Seed-reproducible standard normal vector");
  m.def("mix_seeds", &esenas::mix_seeds, py::arg("a"), py::arg("b"));

  m.def(
      "es_gradient",
      [](const std::vector<double>& vs,
         const std::vector<std::vector<double>>& gs, double sigma) {
        return esenas::es_gradient(vs, gs, sigma);
      },
      py::arg("vs"), py::arg("gs"), py::arg("sigma"),
      "Antithetic finite-difference gradient estimate");
  m.def(
      "weight_update",
      [](const std::vector<double>& theta, const std::vector<double>& grad,
         double eta, double rstd) {
        return esenas::weight_update(theta, grad, eta, rstd);
      },
      py::arg("theta"), py::arg("gradient"), py::arg("step_size"),
      py::arg("reward_std"));
  m.def("hybrid_objective", &esenas::hybrid_objective, py::arg("f"),
        py::arg("num_edges"), py::arg("edge_target"));

  m.def(
      "toeplitz_expand",
      [](const std::vector<double>& params, int a, int b) {
        return esenas::toeplitz_expand(params, a, b);
      },
      py::arg("params"), py::arg("rows"), py::arg("cols"));
  m.def(
      "circulant_expand",
      [](const std::vector<double>& params, int a, int b) {
        return esenas::circulant_expand(params, a, b);
      },
      py::arg("params"), py::arg("rows"), py::arg("cols"));

  m.def(
      "param_accounting",
      [](const std::string& coding_json, int state_dim, int action_dim,
         int baseline_hidden) {
        const esenas::WeightCoding coding =
            esenas::coding_from_json(parse(coding_json));
        const esenas::ParamAccount account = esenas::param_accounting(
            coding, {state_dim, action_dim}, baseline_hidden);
        py::dict out;
        out["weight_params"] = account.weight_params;
        out["total_params"] = account.total_params;
        out["compression_pct"] = account.compression_pct;
        out["bit_count"] = account.bit_count;
        return out;
      },
      py::arg("coding_json"), py::arg("state_dim"), py::arg("action_dim"),
      py::arg("baseline_hidden") = 41);
  m.def("accounting_table", [] {
    return esenas::accounting_table(esenas::reference_envs(),
                                    esenas::reference_codings());
  });

  m.def(
      "space_hash",
      [](const std::string& coding_json, int state_dim, int action_dim) {
        return esenas::make_search_space(
                   esenas::coding_from_json(parse(coding_json)),
                   {state_dim, action_dim})
            .space_hash_hex();
      },
      py::arg("coding_json"), py::arg("state_dim"), py::arg("action_dim"));
  m.def(
      "sample_genome",
      [](const std::string& coding_json, int state_dim, int action_dim,
         std::uint64_t seed) {
        const auto spec = esenas::make_search_space(
            esenas::coding_from_json(parse(coding_json)),
            {state_dim, action_dim});
        esenas::CounterRng rng(seed);
        return esenas::serialize(esenas::random_sample(spec, rng), spec);
      },
      py::arg("coding_json"), py::arg("state_dim"), py::arg("action_dim"),
      py::arg("seed"));

  m.def(
      "run",
      [](const std::string& config_json) {
        return esenas::run(esenas::RunConfig::from_json(parse(config_json)));
      },
      py::arg("config_json"), "Run a full experiment; returns the exit code");
  m.def(
      "run_seed",
      [](const std::string& config_json, std::uint64_t seed) {
        const esenas::SeedRunResult result =
            esenas::run_seed(esenas::RunConfig::from_json(parse(config_json)),
                             seed);
        py::dict out;
        out["seed"] = result.seed;
        out["iterations"] = result.logs.size();
        out["final_eval_reward"] = result.final_eval_reward;
        out["best_objective"] = result.best_objective;
        out["best_genome"] = result.best_genome;
        return out;
      },
      py::arg("config_json"), py::arg("seed"));
  m.def(
      "enumerate_oracle",
      [](const std::string& env_json, const std::string& coding_json,
         int state_dim, int action_dim, std::uint64_t seed) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& entry : esenas::enumerate_oracle(
                 parse(env_json), parse(coding_json), {state_dim, action_dim},
                 seed))
          out.emplace_back(entry.genome_text, entry.score);
        return out;
      },
      py::arg("env_json"), py::arg("coding_json"), py::arg("state_dim"),
      py::arg("action_dim"), py::arg("seed"));
}
