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

#ifndef ESENAS_SEARCH_SPACE_HPP_
#define ESENAS_SEARCH_SPACE_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "esenas/rng.hpp"

namespace esenas {

using BigInt = boost::multiprecision::cpp_int;

enum class DecisionKind { kOneOf, kManyOf };

// One categorical decision in the architecture search space.
//   kOneOf:  pick a single alternative out of num_alternatives.
//   kManyOf: pick k alternatives; `distinct` selections are unordered and
//            canonicalized sorted ascending, non-distinct selections are
//            ordered tuples with repetition allowed.
struct DecisionPoint {
  DecisionKind kind = DecisionKind::kOneOf;
  int num_alternatives = 1;
  int k = 1;             // MANY_OF only
  bool distinct = true;  // MANY_OF only
  std::string label;
};

// Nested definition node: a decision point, or a list/dict of child nodes.
// Flattened depth-first into the spec's decision-point list.
class SpaceNode {
 public:
  static SpaceNode one_of(int num_alternatives, std::string label);
  static SpaceNode many_of(int num_alternatives, int k, bool distinct,
                           std::string label);
  static SpaceNode list(std::vector<SpaceNode> children);
  static SpaceNode dict(
      std::vector<std::pair<std::string, SpaceNode>> children);

  void flatten(std::vector<DecisionPoint>* out) const;

 private:
  SpaceNode() = default;
  DecisionPoint point_;
  bool is_leaf_ = false;
  std::vector<std::pair<std::string, SpaceNode>> children_;
};

class SearchSpaceSpec {
 public:
  explicit SearchSpaceSpec(std::vector<DecisionPoint> points);
  explicit SearchSpaceSpec(const SpaceNode& root);

  const std::vector<DecisionPoint>& decision_points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::uint64_t space_hash() const { return space_hash_; }
  // Canonical flattened text the hash is computed over.
  const std::string& description() const { return description_; }
  // 16 lowercase hex chars of the hash, the wire form.
  std::string space_hash_hex() const;

 private:
  std::vector<DecisionPoint> points_;
  std::string description_;
  std::uint64_t space_hash_ = 0;
};

// One concrete assignment of all decision points. choices[d] holds one index
// for ONE_OF and k indices for MANY_OF.
struct Genome {
  std::uint64_t space_hash = 0;
  std::vector<std::vector<int>> choices;

  bool operator==(const Genome& other) const = default;
};

void validate(const Genome& genome, const SearchSpaceSpec& spec);

Genome random_sample(const SearchSpaceSpec& spec, CounterRng& rng);

// Child genome differing from the parent at exactly one decision point.
// Throws MutationImpossible when no decision point has a second legal value.
Genome mutate(const Genome& genome, const SearchSpaceSpec& spec,
              CounterRng& rng);

// Exact number of genomes: product of n (ONE_OF), C(n, k) (MANY_OF distinct)
// and n^k (MANY_OF non-distinct).
BigInt cardinality(const SearchSpaceSpec& spec);

// Canonical UTF-8 JSON text, the wire representation of a genome:
//   {"choices":[...],"space":"<16 hex>","v":1}
std::string serialize(const Genome& genome, const SearchSpaceSpec& spec);
Genome deserialize(const std::string& text, const SearchSpaceSpec& spec);

// Every genome of the space exactly once, in deterministic odometer order.
// Throws TooLarge when cardinality(spec) > limit.
std::vector<Genome> enumerate_all(const SearchSpaceSpec& spec,
                                  std::uint64_t limit);

}  // namespace esenas

#endif  // ESENAS_SEARCH_SPACE_HPP_
