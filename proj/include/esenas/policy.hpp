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

#ifndef ESENAS_POLICY_HPP_
#define ESENAS_POLICY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esenas/search_space.hpp"

namespace esenas {

// Nonlinearity ids, in this fixed order.
inline constexpr int kNumNonlinearities = 11;
enum Nonlinearity : int {
  kTanh = 0,
  kRelu = 1,
  kExp = 2,
  kIdentity = 3,
  kSin = 4,
  kSigmoid = 5,
  kAbs = 6,
  kCos = 7,
  kSquare = 8,
  kReciprocal = 9,
  kStep = 10,
};

// Safety clamps: Exp input clamped to [-30, 30]; Reciprocal denominator
// floored at 1e-6; Step is 1 for x > 0, else 0.
double apply_nonlinearity(int id, double x);

struct GraphEdge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;
};

// Materialized feedforward network. Vertices are 0-based: [0, state_dim) are
// state inputs, the last action_dim vertices are outputs, everything in
// between is hidden. Edges satisfy src < dst and dst >= state_dim.
struct PolicyGraph {
  int num_vertices = 0;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<GraphEdge> edges;            // sorted by (dst, src)
  std::vector<int> nonlinearity_ids;       // one per non-state vertex
  std::vector<double> biases;              // one per non-state vertex

  // Single for-loop forward pass over vertex order. Throws
  // NonFiniteActivation if any value becomes non-finite.
  std::vector<double> forward(std::span<const double> state) const;

  nlohmann::json to_json() const;
};

enum class CodingKind {
  kUnstructured,
  kToeplitz,
  kCirculant,
  kWeightSharing,
  kEdgePruning,
  kMasked,
};

std::string coding_kind_name(CodingKind kind);
CodingKind coding_kind_from_name(const std::string& name);

struct Dims {
  int state_dim = 0;
  int action_dim = 0;
};

struct WeightCoding {
  CodingKind kind = CodingKind::kUnstructured;
  std::vector<int> hidden_sizes;  // empty = linear policy
  int num_colors = 0;             // WEIGHT_SHARING
  int num_edges = 0;              // EDGE_PRUNING, fixed-size mode
  bool boolean_mode = false;      // EDGE_PRUNING, one on/off bit per edge
  double mask_alpha = 0.01;       // MASKED
  bool nonlinearity_search = false;
};

// Vertex layer sizes [S, hidden..., A].
std::vector<int> layer_sizes(const WeightCoding& coding, const Dims& dims);

// All candidate edges of the layered network, in deterministic
// (layer, src, dst) order. This indexing is shared by search spaces, genomes
// and theta layouts.
std::vector<std::pair<int, int>> candidate_edges(const WeightCoding& coding,
                                                 const Dims& dims);

// The architecture search space induced by a coding. Structured codings
// (unstructured/Toeplitz/circulant/masked) have no edge decisions; the
// nonlinearity_search flag appends a ONE_OF(11) per non-state vertex.
SearchSpaceSpec make_search_space(const WeightCoding& coding, const Dims& dims);

// Length of the trainable vector theta_s for a coding (weights followed by
// all non-state biases).
int trainable_parameter_count(const WeightCoding& coding, const Dims& dims);

// Number of edges a genome materializes to, without building the graph.
int genome_edge_count(const Genome& genome, const WeightCoding& coding,
                      const Dims& dims);

// Toeplitz a x b matrix from a+b-1 parameters: first row takes params
// 0..b-1 left to right, the first column below the diagonal continues
// b..a+b-2. Constant along every diagonal.
std::vector<std::vector<double>> toeplitz_expand(std::span<const double> params,
                                                 int a, int b);

// Circulant a x b matrix: build the n x n circulant with n = max(a, b),
// C[i][j] = params[(j - i) mod n], truncate to the top-left a x b block.
std::vector<std::vector<double>> circulant_expand(
    std::span<const double> params, int a, int b);

// Per-entry two-way softmax between logit gamma_e and 0 at temperature alpha.
std::vector<double> soft_mask(std::span<const double> gamma, double alpha);

// Fraction of mask entries above 0.5.
double mask_density(std::span<const double> mask);

// Annealed masked-coding objective: beta * f + (1 - beta) * (1 - lambda),
// with f pre-normalized to [0, 1].
double masked_training_objective(double f, double lambda, double beta);

// Build the concrete policy graph for (genome, theta) under a coding.
// Structured codings ignore the genome's edge content; searched codings
// consume it. Nonlinearity decision points, when present, come last.
PolicyGraph materialize(const Genome& genome, std::span<const double> theta,
                        const WeightCoding& coding, const Dims& dims);

struct ParamAccount {
  long long weight_params = 0;
  long long total_params = 0;  // weights + all non-state biases
  double compression_pct = 0.0;
  long long bit_count = 0;
};

// Parameter, compression and bit accounting for a coding. Compression is
// measured against an unstructured one-hidden-layer reference network of
// width `baseline_hidden`.
ParamAccount param_accounting(const WeightCoding& coding, const Dims& dims,
                              int baseline_hidden = 41);

}  // namespace esenas

#endif  // ESENAS_POLICY_HPP_
