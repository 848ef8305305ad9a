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

#include "esenas/search_space.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "esenas/errors.hpp"

namespace esenas {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : text) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

void check_point(const DecisionPoint& p) {
  if (p.num_alternatives < 1)
    throw RangeError("decision point '" + p.label +
                     "' needs num_alternatives >= 1");
  if (p.kind == DecisionKind::kManyOf) {
    if (p.k < 1) throw RangeError("decision point '" + p.label + "' needs k >= 1");
    if (p.distinct && p.k > p.num_alternatives)
      throw RangeError("decision point '" + p.label +
                       "': distinct selection needs k <= num_alternatives");
  }
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

BigInt point_cardinality(const DecisionPoint& p) {
  if (p.kind == DecisionKind::kOneOf) return p.num_alternatives;
  if (p.distinct) return binomial(p.num_alternatives, p.k);
  BigInt r = 1;
  for (int i = 0; i < p.k; ++i) r *= p.num_alternatives;
  return r;
}

std::vector<int> sample_point(const DecisionPoint& p, CounterRng& rng) {
  if (p.kind == DecisionKind::kOneOf) return {rng.next_int(p.num_alternatives)};
  std::vector<int> sel;
  sel.reserve(p.k);
  if (p.distinct) {
    // Draw without replacement, then canonicalize sorted.
    std::vector<int> pool(p.num_alternatives);
    for (int i = 0; i < p.num_alternatives; ++i) pool[i] = i;
    for (int t = 0; t < p.k; ++t) {
      int j = t + rng.next_int(p.num_alternatives - t);
      std::swap(pool[t], pool[j]);
      sel.push_back(pool[t]);
    }
    std::sort(sel.begin(), sel.end());
  } else {
    for (int t = 0; t < p.k; ++t) sel.push_back(rng.next_int(p.num_alternatives));
  }
  return sel;
}

// A decision point can mutate when some slot has a legal replacement value.
bool mutable_point(const DecisionPoint& p) {
  if (p.num_alternatives < 2) return false;
  if (p.kind == DecisionKind::kOneOf) return true;
  if (!p.distinct) return true;
  return p.k < p.num_alternatives;  // some alternative is unselected
}

}  // namespace

SpaceNode SpaceNode::one_of(int num_alternatives, std::string label) {
  SpaceNode n;
  n.is_leaf_ = true;
  n.point_ = {DecisionKind::kOneOf, num_alternatives, 1, true,
              std::move(label)};
  check_point(n.point_);
  return n;
}

SpaceNode SpaceNode::many_of(int num_alternatives, int k, bool distinct,
                             std::string label) {
  SpaceNode n;
  n.is_leaf_ = true;
  n.point_ = {DecisionKind::kManyOf, num_alternatives, k, distinct,
              std::move(label)};
  check_point(n.point_);
  return n;
}

SpaceNode SpaceNode::list(std::vector<SpaceNode> children) {
  SpaceNode n;
  n.children_.reserve(children.size());
  for (std::size_t i = 0; i < children.size(); ++i)
    n.children_.emplace_back(std::to_string(i), std::move(children[i]));
  return n;
}

SpaceNode SpaceNode::dict(
    std::vector<std::pair<std::string, SpaceNode>> children) {
  SpaceNode n;
  n.children_ = std::move(children);
  return n;
}

void SpaceNode::flatten(std::vector<DecisionPoint>* out) const {
  if (is_leaf_) {
    out->push_back(point_);
    return;
  }
  for (const auto& [key, child] : children_) child.flatten(out);
}

SearchSpaceSpec::SearchSpaceSpec(std::vector<DecisionPoint> points)
    : points_(std::move(points)) {
  std::ostringstream desc;
  for (const auto& p : points_) {
    check_point(p);
    if (p.kind == DecisionKind::kOneOf) {
      desc << "oneof(" << p.num_alternatives << ")";
    } else {
      desc << "manyof(" << p.num_alternatives << "," << p.k << ","
           << (p.distinct ? "distinct" : "repeated") << ")";
    }
    desc << ":" << p.label << ";";
  }
  description_ = desc.str();
  space_hash_ = fnv1a(description_);
}

SearchSpaceSpec::SearchSpaceSpec(const SpaceNode& root)
    : SearchSpaceSpec([&root] {
        std::vector<DecisionPoint> pts;
        root.flatten(&pts);
        return pts;
      }()) {}

std::string SearchSpaceSpec::space_hash_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  std::uint64_t h = space_hash_;
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

void validate(const Genome& genome, const SearchSpaceSpec& spec) {
  if (genome.space_hash != spec.space_hash())
    throw SpaceMismatch("genome space_hash does not match spec");
  if (genome.choices.size() != spec.size())
    throw RangeError("genome has wrong number of decision points");
  for (std::size_t d = 0; d < spec.size(); ++d) {
    const auto& p = spec.decision_points()[d];
    const auto& sel = genome.choices[d];
    const std::size_t want =
        p.kind == DecisionKind::kOneOf ? 1 : static_cast<std::size_t>(p.k);
    if (sel.size() != want)
      throw RangeError("wrong selection count at decision point " +
                       std::to_string(d));
    for (int idx : sel) {
      if (idx < 0 || idx >= p.num_alternatives)
        throw RangeError("index " + std::to_string(idx) +
                         " out of range at decision point " +
                         std::to_string(d));
    }
    if (p.kind == DecisionKind::kManyOf && p.distinct) {
      for (std::size_t t = 1; t < sel.size(); ++t) {
        if (sel[t] <= sel[t - 1])
          throw RangeError(
              "distinct MANY_OF selection must be strictly ascending at "
              "decision point " +
              std::to_string(d));
      }
    }
  }
}

Genome random_sample(const SearchSpaceSpec& spec, CounterRng& rng) {
  Genome g;
  g.space_hash = spec.space_hash();
  g.choices.reserve(spec.size());
  for (const auto& p : spec.decision_points()) g.choices.push_back(sample_point(p, rng));
  return g;
}

Genome mutate(const Genome& genome, const SearchSpaceSpec& spec,
              CounterRng& rng) {
  validate(genome, spec);
  std::vector<int> candidates;
  for (std::size_t d = 0; d < spec.size(); ++d) {
    if (mutable_point(spec.decision_points()[d]))
      candidates.push_back(static_cast<int>(d));
  }
  if (candidates.empty())
    throw MutationImpossible("every decision point has a single legal value");

  Genome child = genome;
  const int d = candidates[rng.next_int(static_cast<int>(candidates.size()))];
  const auto& p = spec.decision_points()[d];
  auto& sel = child.choices[d];
  if (p.kind == DecisionKind::kOneOf) {
    // Resample uniformly among the other alternatives.
    int v = rng.next_int(p.num_alternatives - 1);
    if (v >= sel[0]) ++v;
    sel[0] = v;
  } else {
    const int slot = rng.next_int(p.k);
    if (p.distinct) {
      std::vector<int> unselected;
      for (int i = 0; i < p.num_alternatives; ++i) {
        if (!std::binary_search(sel.begin(), sel.end(), i)) unselected.push_back(i);
      }
      sel[slot] = unselected[rng.next_int(static_cast<int>(unselected.size()))];
      std::sort(sel.begin(), sel.end());
    } else {
      int v = rng.next_int(p.num_alternatives - 1);
      if (v >= sel[slot]) ++v;
      sel[slot] = v;
    }
  }
  return child;
}

BigInt cardinality(const SearchSpaceSpec& spec) {
  BigInt total = 1;
  for (const auto& p : spec.decision_points()) total *= point_cardinality(p);
  return total;
}

std::string serialize(const Genome& genome, const SearchSpaceSpec& spec) {
  validate(genome, spec);
  json choices = json::array();
  for (std::size_t d = 0; d < spec.size(); ++d) {
    if (spec.decision_points()[d].kind == DecisionKind::kOneOf) {
      choices.push_back(genome.choices[d][0]);
    } else {
      choices.push_back(genome.choices[d]);
    }
  }
  json doc;
  doc["choices"] = std::move(choices);
  doc["space"] = spec.space_hash_hex();
  doc["v"] = 1;
  return doc.dump();  // nlohmann orders keys lexicographically, no whitespace
}

Genome deserialize(const std::string& text, const SearchSpaceSpec& spec) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed genome string: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc.contains("space") ||
      !doc.contains("v"))
    throw ParseError("genome string missing required keys");
  if (doc["v"] != 1) throw ParseError("unsupported genome version");
  if (doc["space"].get<std::string>() != spec.space_hash_hex())
    throw SpaceMismatch("genome string was produced for a different space");

  const auto& choices = doc["choices"];
  if (!choices.is_array() || choices.size() != spec.size())
    throw ParseError("genome string has wrong number of choices");

  Genome g;
  g.space_hash = spec.space_hash();
  g.choices.resize(spec.size());
  for (std::size_t d = 0; d < spec.size(); ++d) {
    const auto& p = spec.decision_points()[d];
    const auto& entry = choices[d];
    if (p.kind == DecisionKind::kOneOf) {
      if (!entry.is_number_integer())
        throw ParseError("ONE_OF entry must be a bare integer");
      g.choices[d] = {entry.get<int>()};
    } else {
      if (!entry.is_array()) throw ParseError("MANY_OF entry must be an array");
      g.choices[d] = entry.get<std::vector<int>>();
    }
  }
  validate(g, spec);
  return g;
}

std::vector<Genome> enumerate_all(const SearchSpaceSpec& spec,
                                  std::uint64_t limit) {
  const BigInt total = cardinality(spec);
  if (total > limit)
    throw TooLarge("search space has " + total.str() +
                   " genomes, above the limit of " + std::to_string(limit));

  // Per-point selection lists, then an odometer over them.
  std::vector<std::vector<std::vector<int>>> options;
  options.reserve(spec.size());
  for (const auto& p : spec.decision_points()) {
    std::vector<std::vector<int>> opts;
    if (p.kind == DecisionKind::kOneOf) {
      for (int i = 0; i < p.num_alternatives; ++i) opts.push_back({i});
    } else if (p.distinct) {
      // Ascending k-combinations.
      std::vector<int> comb(p.k);
      for (int i = 0; i < p.k; ++i) comb[i] = i;
      while (true) {
        opts.push_back(comb);
        int i = p.k - 1;
        while (i >= 0 && comb[i] == p.num_alternatives - p.k + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < p.k; ++j) comb[j] = comb[j - 1] + 1;
      }
    } else {
      // Ordered tuples with repetition.
      std::vector<int> tup(p.k, 0);
      while (true) {
        opts.push_back(tup);
        int i = p.k - 1;
        while (i >= 0 && tup[i] == p.num_alternatives - 1) tup[i--] = 0;
        if (i < 0) break;
        ++tup[i];
      }
    }
    options.push_back(std::move(opts));
  }

  std::vector<Genome> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> idx(spec.size(), 0);
  while (true) {
    Genome g;
    g.space_hash = spec.space_hash();
    g.choices.reserve(spec.size());
    for (std::size_t d = 0; d < spec.size(); ++d)
      g.choices.push_back(options[d][idx[d]]);
    out.push_back(std::move(g));
    int d = static_cast<int>(spec.size()) - 1;
    while (d >= 0 && idx[d] + 1 == options[d].size()) idx[d--] = 0;
    if (d < 0) break;
    ++idx[d];
  }
  return out;
}

}  // namespace esenas
