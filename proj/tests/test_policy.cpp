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

#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "esenas/errors.hpp"
#include "esenas/policy.hpp"
#include "esenas/rng.hpp"

using namespace esenas;

namespace {

Genome sample_for(const WeightCoding& coding, const Dims& dims,
                  std::uint64_t seed) {
  const SearchSpaceSpec spec = make_search_space(coding, dims);
  CounterRng rng(seed);
  return random_sample(spec, rng);
}

}  // namespace

TEST_CASE("nonlinearities evaluate per their ids") {
  CHECK(apply_nonlinearity(kIdentity, -4.2) == -4.2);
  CHECK(apply_nonlinearity(kSquare, 3.0) == 9.0);
  CHECK(apply_nonlinearity(kStep, -0.1) == 0.0);
  CHECK(apply_nonlinearity(kStep, 0.0) == 0.0);
  CHECK(apply_nonlinearity(kStep, 0.1) == 1.0);
  CHECK(apply_nonlinearity(kTanh, 7.0) == doctest::Approx(0.9999983).epsilon(1e-6));
  CHECK(apply_nonlinearity(kRelu, -2.0) == 0.0);
  CHECK(apply_nonlinearity(kAbs, -2.5) == 2.5);
  CHECK(apply_nonlinearity(kCos, 0.0) == 1.0);
  // Safety clamps keep extreme inputs finite.
  CHECK(std::isfinite(apply_nonlinearity(kExp, 1e6)));
  CHECK(apply_nonlinearity(kReciprocal, 0.0) == doctest::Approx(1e6));
  CHECK(apply_nonlinearity(kReciprocal, -1e-9) == doctest::Approx(-1e6));
  CHECK_THROWS_AS(apply_nonlinearity(11, 0.0), UnknownId);
  CHECK_THROWS_AS(apply_nonlinearity(-1, 0.0), UnknownId);
}

TEST_CASE("forward aggregates incoming edges then applies the nonlinearity") {
  PolicyGraph g;
  g.num_vertices = 3;
  g.state_dim = 2;
  g.action_dim = 1;
  g.edges = {{0, 2, 1.0}, {1, 2, 1.0}};
  g.nonlinearity_ids = {kIdentity};
  g.biases = {0.0};
  CHECK(g.forward(std::vector<double>{2.0, 5.0})[0] == 7.0);
  g.nonlinearity_ids = {kTanh};
  CHECK(g.forward(std::vector<double>{2.0, 5.0})[0] ==
        doctest::Approx(std::tanh(7.0)));

  PolicyGraph single;
  single.num_vertices = 2;
  single.state_dim = 1;
  single.action_dim = 1;
  single.edges = {{0, 1, 2.0}};
  single.nonlinearity_ids = {kIdentity};
  single.biases = {0.0};
  CHECK(single.forward(std::vector<double>{3.0})[0] == 6.0);
}

TEST_CASE("forward is linear in state with identity nonlinearities") {
  const WeightCoding coding{CodingKind::kUnstructured, {4}};
  const Dims dims{3, 2};
  std::vector<double> theta(
      static_cast<std::size_t>(trainable_parameter_count(coding, dims)));
  CounterRng rng(8);
  for (auto& t : theta) t = rng.next_gaussian();
  // Zero all biases so the map is exactly linear.
  for (std::size_t i = theta.size() - 6; i < theta.size(); ++i) theta[i] = 0.0;
  PolicyGraph g = materialize(sample_for(coding, dims, 1), theta, coding, dims);
  for (auto& id : g.nonlinearity_ids) id = kIdentity;

  const std::vector<double> s1{0.5, -1.0, 2.0}, s2{1.5, 0.25, -0.75};
  std::vector<double> mix(3);
  for (int i = 0; i < 3; ++i) mix[static_cast<std::size_t>(i)] =
      2.0 * s1[static_cast<std::size_t>(i)] - 3.0 * s2[static_cast<std::size_t>(i)];
  const auto y1 = g.forward(s1), y2 = g.forward(s2), ym = g.forward(mix);
  for (int j = 0; j < 2; ++j) {
    CHECK(ym[static_cast<std::size_t>(j)] ==
          doctest::Approx(2.0 * y1[static_cast<std::size_t>(j)] -
                          3.0 * y2[static_cast<std::size_t>(j)])
              .epsilon(1e-9));
  }
}

TEST_CASE("toeplitz expansion has constant diagonals and the Fig-3 layout") {
  const std::vector<double> p{1.0, 2.0, 3.0};
  const auto w = toeplitz_expand(p, 2, 2);
  CHECK(w == std::vector<std::vector<double>>{{1.0, 2.0}, {3.0, 1.0}});

  CHECK(toeplitz_expand(std::vector<double>{7.0}, 1, 1) ==
        std::vector<std::vector<double>>{{7.0}});

  std::vector<double> p9(9);
  for (int i = 0; i < 9; ++i) p9[static_cast<std::size_t>(i)] = i + 1.0;
  const auto big = toeplitz_expand(p9, 4, 6);
  for (int i = 0; i + 1 < 4; ++i) {
    for (int j = 0; j + 1 < 6; ++j) {
      CHECK(big[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
            big[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)]);
    }
  }
  CHECK_THROWS_AS(toeplitz_expand(p, 4, 6), DimensionMismatch);
}

TEST_CASE("circulant expansion cycles row 0 and truncates") {
  const std::vector<double> p{1.0, 2.0, 3.0};
  CHECK(circulant_expand(p, 3, 3) ==
        std::vector<std::vector<double>>{
            {1.0, 2.0, 3.0}, {3.0, 1.0, 2.0}, {2.0, 3.0, 1.0}});
  CHECK(circulant_expand(std::vector<double>{5.0}, 1, 1) ==
        std::vector<std::vector<double>>{{5.0}});
  // Rectangular truncation of the max(a,b)-sized square matrix.
  const std::vector<double> p4{1.0, 2.0, 3.0, 4.0};
  const auto w = circulant_expand(p4, 2, 4);
  CHECK(w == std::vector<std::vector<double>>{{1.0, 2.0, 3.0, 4.0},
                                              {4.0, 1.0, 2.0, 3.0}});
  CHECK_THROWS_AS(circulant_expand(p, 2, 4), DimensionMismatch);
}

TEST_CASE("unstructured materialization matches a dense matrix oracle") {
  const WeightCoding coding{CodingKind::kUnstructured, {}};
  const Dims dims{3, 2};
  // theta = 6 weights (row-major state x action) + 2 output biases.
  const std::vector<double> theta{1, 2, 3, 4, 5, 6, 0.5, -0.5};
  PolicyGraph g = materialize(sample_for(coding, dims, 2), theta, coding, dims);
  for (auto& id : g.nonlinearity_ids) id = kIdentity;
  const std::vector<double> s{1.0, -1.0, 2.0};
  const auto y = g.forward(s);
  // W^T s + b with W[i][j] = theta[i*2+j].
  CHECK(y[0] == doctest::Approx(1 * 1 + 3 * -1 + 5 * 2 + 0.5));
  CHECK(y[1] == doctest::Approx(2 * 1 + 4 * -1 + 6 * 2 - 0.5));
}

TEST_CASE("edge pruning keeps exactly the selected edges") {
  WeightCoding coding{CodingKind::kEdgePruning, {32, 32}};
  coding.num_edges = 64;
  const Dims dims{17, 6};
  const Genome g = sample_for(coding, dims, 3);
  std::vector<double> theta(
      static_cast<std::size_t>(trainable_parameter_count(coding, dims)), 0.1);
  const PolicyGraph graph = materialize(g, theta, coding, dims);
  CHECK(graph.edges.size() == 64);
  CHECK(genome_edge_count(g, coding, dims) == 64);
}

TEST_CASE("boolean edge pruning: empty genome yields an edgeless graph") {
  WeightCoding coding{CodingKind::kEdgePruning, {}};
  coding.boolean_mode = true;
  const Dims dims{4, 2};
  const SearchSpaceSpec spec = make_search_space(coding, dims);
  Genome g;
  g.space_hash = spec.space_hash();
  g.choices.assign(spec.size(), {0});
  std::vector<double> theta(
      static_cast<std::size_t>(trainable_parameter_count(coding, dims)), 1.0);
  const PolicyGraph graph = materialize(g, theta, coding, dims);
  CHECK(graph.edges.empty());
  CHECK(genome_edge_count(g, coding, dims) == 0);
  // Forward still works: biases through nonlinearities.
  CHECK(graph.forward(std::vector<double>{1, 2, 3, 4}).size() == 2);
}

TEST_CASE("weight sharing maps every edge weight into the color dictionary") {
  WeightCoding coding{CodingKind::kWeightSharing, {5}};
  coding.num_colors = 1;
  const Dims dims{3, 2};
  const Genome g = sample_for(coding, dims, 4);
  std::vector<double> theta(
      static_cast<std::size_t>(trainable_parameter_count(coding, dims)), 0.0);
  theta[0] = 3.25;  // the single shared weight
  const PolicyGraph graph = materialize(g, theta, coding, dims);
  CHECK(graph.edges.size() == candidate_edges(coding, dims).size());
  for (const GraphEdge& e : graph.edges) CHECK(e.weight == 3.25);
}

TEST_CASE("soft mask thresholds near-binary at the default temperature") {
  CHECK(soft_mask(std::vector<double>{0.0}, 0.01)[0] == 0.5);
  CHECK(soft_mask(std::vector<double>{1.0}, 0.01)[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(soft_mask(std::vector<double>{-1.0}, 0.01)[0] ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mask_density(std::vector<double>{0.9, 0.1, 0.6}) ==
        doctest::Approx(2.0 / 3.0));
}

TEST_CASE("masked training objective is the stated convex combination") {
  CHECK(masked_training_objective(0.7, 0.4, 1.0) == doctest::Approx(0.7));
  CHECK(masked_training_objective(0.7, 0.25, 0.0) == doctest::Approx(0.75));
  CHECK(masked_training_objective(0.2, 0.6, 0.5) == doctest::Approx(0.3));
  CHECK_THROWS_AS(masked_training_objective(0.2, 0.6, 1.5), RangeError);
  CHECK_THROWS_AS(masked_training_objective(0.2, -0.1, 0.5), RangeError);
}

TEST_CASE("nonlinearity search decisions land on the materialized graph") {
  WeightCoding coding{CodingKind::kUnstructured, {4}};
  coding.nonlinearity_search = true;
  const Dims dims{3, 2};
  const SearchSpaceSpec spec = make_search_space(coding, dims);
  // 6 non-state vertices, each an ONE_OF(11) decision point.
  REQUIRE(spec.size() == 6);
  CounterRng rng(6);
  const Genome g = random_sample(spec, rng);
  std::vector<double> theta(
      static_cast<std::size_t>(trainable_parameter_count(coding, dims)), 0.1);
  const PolicyGraph graph = materialize(g, theta, coding, dims);
  for (std::size_t v = 0; v < 6; ++v)
    CHECK(graph.nonlinearity_ids[v] == g.choices[v][0]);
}

TEST_CASE("parameter accounting reproduces the reference table") {
  struct Row {
    Dims dims;
    CodingKind kind;
    long long weights;
    double compression;
  };
  // (env dims, coding) -> published weights / compression.
  const std::vector<Row> rows{
      {{23, 7}, CodingKind::kToeplitz, 110, 88.0},
      {{23, 7}, CodingKind::kCirculant, 82, 90.0},
      {{23, 7}, CodingKind::kUnstructured, 1230, 0.0},
      {{17, 6}, CodingKind::kToeplitz, 103, 85.0},
      {{17, 6}, CodingKind::kCirculant, 82, 88.0},
      {{17, 6}, CodingKind::kUnstructured, 943, 0.0},
      {{11, 3}, CodingKind::kToeplitz, 94, 78.0},
      {{11, 3}, CodingKind::kCirculant, 82, 80.0},
      {{11, 3}, CodingKind::kUnstructured, 574, 0.0},
  };
  for (const Row& row : rows) {
    const WeightCoding coding{row.kind, {41}};
    const ParamAccount account = param_accounting(coding, row.dims);
    CHECK(account.weight_params == row.weights);
    CHECK(std::abs(account.compression_pct - row.compression) < 1.0);
  }

  // Weight sharing bit counts, |C| = max(|S|, |A|).
  WeightCoding hopper_ws{CodingKind::kWeightSharing, {41}};
  hopper_ws.num_colors = 11;
  CHECK(param_accounting(hopper_ws, {11, 3}).bit_count == 3960);
  WeightCoding hc_ws{CodingKind::kWeightSharing, {41}};
  hc_ws.num_colors = 17;
  CHECK(param_accounting(hc_ws, {17, 6}).bit_count == 6571);

  // Edge pruning uses hidden width 32 and 64 chosen edges.
  WeightCoding ep{CodingKind::kEdgePruning, {32, 32}};
  ep.num_edges = 64;
  CHECK(param_accounting(ep, {17, 6}).weight_params == 64);
}

TEST_CASE("trainable parameter count matches the theta layout") {
  const Dims dims{5, 2};
  const WeightCoding unstructured{CodingKind::kUnstructured, {7}};
  // 5*7 + 7*2 weights, 7 + 2 biases.
  CHECK(trainable_parameter_count(unstructured, dims) == 49 + 9);
  const WeightCoding toeplitz{CodingKind::kToeplitz, {7}};
  CHECK(trainable_parameter_count(toeplitz, dims) == (5 + 7 - 1) + (7 + 2 - 1) + 9);
  WeightCoding sharing{CodingKind::kWeightSharing, {7}};
  sharing.num_colors = 5;
  CHECK(trainable_parameter_count(sharing, dims) == 5 + 9);
}

TEST_CASE("materialize validates genome and theta consistency") {
  const WeightCoding coding{CodingKind::kUnstructured, {}};
  const Dims dims{3, 2};
  const Genome g = sample_for(coding, dims, 5);
  std::vector<double> short_theta(3, 0.0);
  CHECK_THROWS_AS(materialize(g, short_theta, coding, dims),
                  WeightLengthMismatch);
  Genome wrong = g;
  wrong.space_hash ^= 1;
  std::vector<double> theta(
      static_cast<std::size_t>(trainable_parameter_count(coding, dims)), 0.0);
  CHECK_THROWS_AS(materialize(wrong, theta, coding, dims),
                  GenomeSpaceMismatch);
}
