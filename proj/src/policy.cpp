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

#include "esenas/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "esenas/errors.hpp"

namespace esenas {
namespace {

int non_state_count(const std::vector<int>& layers) {
  int total = 0;
  for (std::size_t l = 1; l < layers.size(); ++l) total += layers[l];
  return total;
}

long long unstructured_weights(const std::vector<int>& layers) {
  long long total = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    total += static_cast<long long>(layers[l]) * layers[l + 1];
  return total;
}

long long coding_weight_params(const WeightCoding& coding,
                               const std::vector<int>& layers) {
  switch (coding.kind) {
    case CodingKind::kUnstructured:
      return unstructured_weights(layers);
    case CodingKind::kToeplitz: {
      long long total = 0;
      for (std::size_t l = 0; l + 1 < layers.size(); ++l)
        total += layers[l] + layers[l + 1] - 1;
      return total;
    }
    case CodingKind::kCirculant: {
      long long total = 0;
      for (std::size_t l = 0; l + 1 < layers.size(); ++l)
        total += std::max(layers[l], layers[l + 1]);
      return total;
    }
    case CodingKind::kWeightSharing:
      return coding.num_colors;
    case CodingKind::kEdgePruning:
      return coding.boolean_mode ? unstructured_weights(layers)
                                 : coding.num_edges;
    case CodingKind::kMasked:
      return unstructured_weights(layers);
  }
  throw UnknownId("bad coding kind");
}

void check_coding(const WeightCoding& coding, const std::vector<int>& layers) {
  for (int h : layers) {
    if (h < 1) throw DimensionMismatch("layer sizes must be positive");
  }
  if (coding.kind == CodingKind::kWeightSharing && coding.num_colors < 1)
    throw DimensionMismatch("weight sharing needs num_colors >= 1");
  if (coding.kind == CodingKind::kEdgePruning && !coding.boolean_mode) {
    const long long e_max = unstructured_weights(layers);
    if (coding.num_edges < 0 || coding.num_edges > e_max)
      throw DimensionMismatch("edge pruning needs 0 <= num_edges <= |E_max|");
  }
  if (coding.kind == CodingKind::kMasked && coding.mask_alpha <= 0.0)
    throw RangeError("mask temperature must be positive");
}

}  // namespace

double apply_nonlinearity(int id, double x) {
  switch (id) {
    case kTanh:
      return std::tanh(x);
    case kRelu:
      return x > 0.0 ? x : 0.0;
    case kExp:
      return std::exp(std::clamp(x, -30.0, 30.0));
    case kIdentity:
      return x;
    case kSin:
      return std::sin(x);
    case kSigmoid:
      return 1.0 / (1.0 + std::exp(std::clamp(-x, -30.0, 30.0)));
    case kAbs:
      return std::fabs(x);
    case kCos:
      return std::cos(x);
    case kSquare:
      return x * x;
    case kReciprocal:
      return (x < 0.0 ? -1.0 : 1.0) / std::max(std::fabs(x), 1e-6);
    case kStep:
      return x > 0.0 ? 1.0 : 0.0;
    default:
      throw UnknownId("unknown nonlinearity id " + std::to_string(id));
  }
}

std::vector<double> PolicyGraph::forward(std::span<const double> state) const {
  if (static_cast<int>(state.size()) != state_dim)
    throw DimensionMismatch("state vector has wrong dimension");
  std::vector<double> values(num_vertices, 0.0);
  std::copy(state.begin(), state.end(), values.begin());

  std::size_t e = 0;
  for (int j = state_dim; j < num_vertices; ++j) {
    double acc = biases[j - state_dim];
    while (e < edges.size() && edges[e].dst == j) {
      acc += values[edges[e].src] * edges[e].weight;
      ++e;
    }
    const double v = apply_nonlinearity(nonlinearity_ids[j - state_dim], acc);
    if (!std::isfinite(v))
      throw NonFiniteActivation("non-finite activation at vertex " +
                                std::to_string(j));
    values[j] = v;
  }
  return std::vector<double>(values.end() - action_dim, values.end());
}

nlohmann::json PolicyGraph::to_json() const {
  nlohmann::json doc;
  doc["num_vertices"] = num_vertices;
  doc["state_dim"] = state_dim;
  doc["action_dim"] = action_dim;
  nlohmann::json edge_list = nlohmann::json::array();
  for (const auto& e : edges)
    edge_list.push_back({{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}});
  doc["edges"] = std::move(edge_list);
  doc["nonlinearity_ids"] = nonlinearity_ids;
  doc["biases"] = biases;
  return doc;
}

std::string coding_kind_name(CodingKind kind) {
  switch (kind) {
    case CodingKind::kUnstructured:
      return "unstructured";
    case CodingKind::kToeplitz:
      return "toeplitz";
    case CodingKind::kCirculant:
      return "circulant";
    case CodingKind::kWeightSharing:
      return "weight_sharing";
    case CodingKind::kEdgePruning:
      return "edge_pruning";
    case CodingKind::kMasked:
      return "masked";
  }
  throw UnknownId("bad coding kind");
}

CodingKind coding_kind_from_name(const std::string& name) {
  if (name == "unstructured") return CodingKind::kUnstructured;
  if (name == "toeplitz") return CodingKind::kToeplitz;
  if (name == "circulant") return CodingKind::kCirculant;
  if (name == "weight_sharing") return CodingKind::kWeightSharing;
  if (name == "edge_pruning") return CodingKind::kEdgePruning;
  if (name == "masked") return CodingKind::kMasked;
  throw ConfigError("unknown coding kind '" + name + "'");
}

std::vector<int> layer_sizes(const WeightCoding& coding, const Dims& dims) {
  std::vector<int> layers;
  layers.push_back(dims.state_dim);
  for (int h : coding.hidden_sizes) layers.push_back(h);
  layers.push_back(dims.action_dim);
  check_coding(coding, layers);
  return layers;
}

std::vector<std::pair<int, int>> candidate_edges(const WeightCoding& coding,
                                                 const Dims& dims) {
  const auto layers = layer_sizes(coding, dims);
  std::vector<std::pair<int, int>> edges;
  int src_base = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const int dst_base = src_base + layers[l];
    for (int i = 0; i < layers[l]; ++i) {
      for (int j = 0; j < layers[l + 1]; ++j) {
        edges.emplace_back(src_base + i, dst_base + j);
      }
    }
    src_base = dst_base;
  }
  return edges;
}

SearchSpaceSpec make_search_space(const WeightCoding& coding,
                                  const Dims& dims) {
  const auto layers = layer_sizes(coding, dims);
  const auto edges = candidate_edges(coding, dims);
  std::vector<DecisionPoint> points;
  switch (coding.kind) {
    case CodingKind::kEdgePruning:
      if (coding.boolean_mode) {
        for (const auto& [i, j] : edges) {
          points.push_back({DecisionKind::kOneOf, 2, 1, true,
                            "edge_" + std::to_string(i) + "_" +
                                std::to_string(j)});
        }
      } else {
        points.push_back({DecisionKind::kManyOf,
                          static_cast<int>(edges.size()), coding.num_edges,
                          true, "edges"});
      }
      break;
    case CodingKind::kWeightSharing:
      for (const auto& [i, j] : edges) {
        points.push_back({DecisionKind::kOneOf, coding.num_colors, 1, true,
                          "color_" + std::to_string(i) + "_" +
                              std::to_string(j)});
      }
      break;
    default:
      break;  // structured codings carry no edge decisions
  }
  if (coding.nonlinearity_search) {
    const int n = non_state_count(layers);
    const int first = dims.state_dim;
    for (int v = 0; v < n; ++v) {
      points.push_back({DecisionKind::kOneOf, kNumNonlinearities, 1, true,
                        "nonlin_v" + std::to_string(first + v)});
    }
  }
  return SearchSpaceSpec(std::move(points));
}

int trainable_parameter_count(const WeightCoding& coding, const Dims& dims) {
  const auto layers = layer_sizes(coding, dims);
  long long weights = coding_weight_params(coding, layers);
  if (coding.kind == CodingKind::kMasked) weights *= 2;  // [W, Gamma]
  return static_cast<int>(weights + non_state_count(layers));
}

int genome_edge_count(const Genome& genome, const WeightCoding& coding,
                      const Dims& dims) {
  const auto layers = layer_sizes(coding, dims);
  if (coding.kind == CodingKind::kEdgePruning) {
    if (!coding.boolean_mode) return coding.num_edges;
    int count = 0;
    const long long e_max = unstructured_weights(layers);
    for (long long e = 0; e < e_max; ++e) {
      if (genome.choices.at(e).at(0) == 1) ++count;
    }
    return count;
  }
  return static_cast<int>(unstructured_weights(layers));
}

std::vector<std::vector<double>> toeplitz_expand(std::span<const double> params,
                                                 int a, int b) {
  if (a < 1 || b < 1) throw DimensionMismatch("toeplitz dims must be positive");
  if (static_cast<int>(params.size()) != a + b - 1)
    throw DimensionMismatch("toeplitz expects a+b-1 parameters");
  std::vector<std::vector<double>> w(a, std::vector<double>(b));
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) {
      w[i][j] = j >= i ? params[j - i] : params[b - 1 + (i - j)];
    }
  }
  return w;
}

std::vector<std::vector<double>> circulant_expand(
    std::span<const double> params, int a, int b) {
  if (a < 1 || b < 1)
    throw DimensionMismatch("circulant dims must be positive");
  const int n = std::max(a, b);
  if (static_cast<int>(params.size()) != n)
    throw DimensionMismatch("circulant expects max(a,b) parameters");
  std::vector<std::vector<double>> w(a, std::vector<double>(b));
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) {
      w[i][j] = params[((j - i) % n + n) % n];
    }
  }
  return w;
}

std::vector<double> soft_mask(std::span<const double> gamma, double alpha) {
  if (alpha <= 0.0) throw RangeError("mask temperature must be positive");
  std::vector<double> mask(gamma.size());
  for (std::size_t e = 0; e < gamma.size(); ++e) {
    // Two-way softmax between gamma_e and a zero drop logit.
    mask[e] = 1.0 / (1.0 + std::exp(std::clamp(-gamma[e] / alpha, -700.0, 700.0)));
  }
  return mask;
}

double mask_density(std::span<const double> mask) {
  if (mask.empty()) return 0.0;
  int kept = 0;
  for (double m : mask) {
    if (m > 0.5) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(mask.size());
}

double masked_training_objective(double f, double lambda, double beta) {
  if (beta < 0.0 || beta > 1.0) throw RangeError("beta must be in [0, 1]");
  if (lambda < 0.0 || lambda > 1.0)
    throw RangeError("lambda must be in [0, 1]");
  return beta * f + (1.0 - beta) * (1.0 - lambda);
}

PolicyGraph materialize(const Genome& genome, std::span<const double> theta,
                        const WeightCoding& coding, const Dims& dims) {
  const auto layers = layer_sizes(coding, dims);
  const auto all_edges = candidate_edges(coding, dims);
  const auto spec = make_search_space(coding, dims);
  if (genome.space_hash != spec.space_hash())
    throw GenomeSpaceMismatch("genome was sampled from a different space");
  validate(genome, spec);
  if (static_cast<int>(theta.size()) != trainable_parameter_count(coding, dims))
    throw WeightLengthMismatch("theta has length " +
                               std::to_string(theta.size()) + ", expected " +
                               std::to_string(trainable_parameter_count(coding, dims)));
  for (double w : theta) {
    if (!std::isfinite(w)) throw NonFiniteUpdate("theta contains non-finite values");
  }

  PolicyGraph graph;
  graph.state_dim = dims.state_dim;
  graph.action_dim = dims.action_dim;
  graph.num_vertices = std::accumulate(layers.begin(), layers.end(), 0);
  const int non_state = non_state_count(layers);
  graph.nonlinearity_ids.assign(non_state, kTanh);
  graph.biases.assign(theta.end() - non_state, theta.end());

  switch (coding.kind) {
    case CodingKind::kUnstructured:
    case CodingKind::kMasked: {
      const std::size_t e_max = all_edges.size();
      std::vector<double> mask;
      if (coding.kind == CodingKind::kMasked)
        mask = soft_mask(theta.subspan(e_max, e_max), coding.mask_alpha);
      for (std::size_t e = 0; e < e_max; ++e) {
        double w = theta[e];
        if (coding.kind == CodingKind::kMasked) w *= mask[e];
        graph.edges.push_back({all_edges[e].first, all_edges[e].second, w});
      }
      break;
    }
    case CodingKind::kToeplitz:
    case CodingKind::kCirculant: {
      std::size_t offset = 0, e = 0;
      for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        const int a = layers[l], b = layers[l + 1];
        const int count = coding.kind == CodingKind::kToeplitz ? a + b - 1
                                                               : std::max(a, b);
        const auto w = coding.kind == CodingKind::kToeplitz
                           ? toeplitz_expand(theta.subspan(offset, count), a, b)
                           : circulant_expand(theta.subspan(offset, count), a, b);
        for (int i = 0; i < a; ++i) {
          for (int j = 0; j < b; ++j, ++e) {
            graph.edges.push_back(
                {all_edges[e].first, all_edges[e].second, w[i][j]});
          }
        }
        offset += count;
      }
      break;
    }
    case CodingKind::kWeightSharing: {
      for (std::size_t e = 0; e < all_edges.size(); ++e) {
        const int color = genome.choices[e][0];
        graph.edges.push_back(
            {all_edges[e].first, all_edges[e].second, theta[color]});
      }
      break;
    }
    case CodingKind::kEdgePruning: {
      if (coding.boolean_mode) {
        for (std::size_t e = 0; e < all_edges.size(); ++e) {
          if (genome.choices[e][0] == 1) {
            graph.edges.push_back(
                {all_edges[e].first, all_edges[e].second, theta[e]});
          }
        }
      } else {
        const auto& selected = genome.choices[0];
        for (std::size_t slot = 0; slot < selected.size(); ++slot) {
          const auto& [i, j] = all_edges[selected[slot]];
          graph.edges.push_back({i, j, theta[slot]});
        }
      }
      break;
    }
  }

  if (coding.nonlinearity_search) {
    const std::size_t first = genome.choices.size() - non_state;
    for (int v = 0; v < non_state; ++v)
      graph.nonlinearity_ids[v] = genome.choices[first + v][0];
  }

  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const GraphEdge& x, const GraphEdge& y) {
              return std::tie(x.dst, x.src) < std::tie(y.dst, y.src);
            });
  return graph;
}

ParamAccount param_accounting(const WeightCoding& coding, const Dims& dims,
                              int baseline_hidden) {
  const auto layers = layer_sizes(coding, dims);
  ParamAccount acct;
  acct.weight_params = coding_weight_params(coding, layers);

  long long hidden_biases = 0;
  for (std::size_t l = 1; l + 1 < layers.size(); ++l) hidden_biases += layers[l];
  acct.total_params = acct.weight_params + non_state_count(layers);

  // Reference: unstructured net with one hidden layer of baseline_hidden.
  const long long base_weights =
      static_cast<long long>(dims.state_dim) * baseline_hidden +
      static_cast<long long>(baseline_hidden) * dims.action_dim;
  const double coding_size =
      static_cast<double>(acct.weight_params + hidden_biases);
  const double base_size = static_cast<double>(base_weights + baseline_hidden);
  acct.compression_pct = 100.0 * (1.0 - coding_size / base_size);

  const long long e_max = unstructured_weights(layers);
  long long dictionary_bits = 0;
  switch (coding.kind) {
    case CodingKind::kWeightSharing: {
      long long bits_per_edge = 0;
      while ((1LL << bits_per_edge) < coding.num_colors) ++bits_per_edge;
      dictionary_bits = e_max * bits_per_edge;
      break;
    }
    case CodingKind::kEdgePruning:
    case CodingKind::kMasked:
      dictionary_bits = e_max;  // one keep/drop bit per candidate edge
      break;
    default:
      break;
  }
  acct.bit_count = 32 * (acct.weight_params + hidden_biases) + dictionary_bits;
  return acct;
}

}  // namespace esenas
