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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "esenas/errors.hpp"
#include "esenas/search_space.hpp"

using namespace esenas;

namespace {

SearchSpaceSpec small_spec() {
  return SearchSpaceSpec(SpaceNode::list(
      {SpaceNode::one_of(3, "op"),
       SpaceNode::many_of(5, 2, /*distinct=*/true, "edges")}));
}

int hamming(const Genome& a, const Genome& b) {
  int dist = 0;
  for (std::size_t d = 0; d < a.choices.size(); ++d)
    dist += a.choices[d] != b.choices[d];
  return dist;
}

}  // namespace

TEST_CASE("nested nodes flatten depth-first into a stable order") {
  const SearchSpaceSpec spec(SpaceNode::dict(
      {{"a", SpaceNode::one_of(2, "first")},
       {"b", SpaceNode::list({SpaceNode::one_of(3, "second"),
                              SpaceNode::many_of(4, 2, true, "third")})}}));
  REQUIRE(spec.size() == 3);
  CHECK(spec.decision_points()[0].label == "first");
  CHECK(spec.decision_points()[1].label == "second");
  CHECK(spec.decision_points()[2].label == "third");
  CHECK(spec.decision_points()[2].kind == DecisionKind::kManyOf);
}

TEST_CASE("space hash is stable and separates different spaces") {
  CHECK(small_spec().space_hash() == small_spec().space_hash());
  CHECK(small_spec().space_hash_hex().size() == 16);
  const SearchSpaceSpec other(SpaceNode::one_of(3, "op"));
  CHECK(other.space_hash() != small_spec().space_hash());
}

TEST_CASE("random samples are valid; distinct MANY_OF stays sorted unique") {
  const SearchSpaceSpec spec = small_spec();
  CounterRng rng(11);
  for (int i = 0; i < 500; ++i) {
    const Genome g = random_sample(spec, rng);
    validate(g, spec);
    const auto& sel = g.choices[1];
    REQUIRE(sel.size() == 2);
    CHECK(sel[0] < sel[1]);
  }
}

TEST_CASE("random_sample is uniform over an enumerable space") {
  const SearchSpaceSpec spec = small_spec();  // 3 * C(5,2) = 30 genomes
  const auto all = enumerate_all(spec, 1000);
  REQUIRE(all.size() == 30);
  std::map<std::string, int> counts;
  CounterRng rng(77);
  const int n = 30 * 200;
  for (int i = 0; i < n; ++i) counts[serialize(random_sample(spec, rng), spec)]++;
  REQUIRE(counts.size() == 30);
  // Chi-squared goodness of fit, 29 dof, critical value at alpha=0.001.
  const double expected = n / 30.0;
  double chi2 = 0.0;
  for (const auto& [text, count] : counts) {
    const double d = count - expected;
    chi2 += d * d / expected;
  }
  CHECK(chi2 < 58.3);
}

TEST_CASE("mutate moves Hamming distance exactly one and stays valid") {
  const SearchSpaceSpec spec = small_spec();
  CounterRng rng(3);
  const Genome parent = random_sample(spec, rng);
  for (int i = 0; i < 300; ++i) {
    const Genome child = mutate(parent, spec, rng);
    validate(child, spec);
    CHECK(hamming(parent, child) == 1);
  }
}

TEST_CASE("mutation point selection is uniform over decision points") {
  const SearchSpaceSpec spec = small_spec();
  CounterRng rng(9);
  const Genome parent = random_sample(spec, rng);
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    const Genome child = mutate(parent, spec, rng);
    if (child.choices[0] != parent.choices[0]) ++first;
  }
  // Binomial(n, 1/2): 3 sigma is ~150.
  CHECK(std::abs(first - n / 2) < 150);
}

TEST_CASE("mutation is impossible only when every point is unary") {
  const SearchSpaceSpec unary(SpaceNode::one_of(1, "only"));
  CounterRng rng(1);
  const Genome g = random_sample(unary, rng);
  CHECK_THROWS_AS(mutate(g, unary, rng), MutationImpossible);
}

TEST_CASE("cardinality matches the closed forms") {
  CHECK(cardinality(SearchSpaceSpec(SpaceNode::one_of(3, "x"))) == 3);
  CHECK(cardinality(small_spec()) == 30);
  CHECK(cardinality(SearchSpaceSpec(
            SpaceNode::many_of(5, 2, /*distinct=*/false, "t"))) == 25);
  // Boolean edge space of an 8x2 linear policy: 16 independent bits.
  std::vector<SpaceNode> bits;
  for (int i = 0; i < 16; ++i)
    bits.push_back(SpaceNode::one_of(2, "edge" + std::to_string(i)));
  CHECK(cardinality(SearchSpaceSpec(SpaceNode::list(bits))) == 65536);
}

TEST_CASE("serialization uses the exact canonical byte form") {
  const SearchSpaceSpec spec = small_spec();
  Genome g;
  g.space_hash = spec.space_hash();
  g.choices = {{2}, {1, 4}};
  CHECK(serialize(g, spec) == "{\"choices\":[2,[1,4]],\"space\":\"" +
                                  spec.space_hash_hex() + "\",\"v\":1}");
}

TEST_CASE("serialize/deserialize roundtrips and is injective") {
  const SearchSpaceSpec spec = small_spec();
  CounterRng rng(23);
  std::set<std::string> texts;
  for (int i = 0; i < 1000; ++i) {
    const Genome g = random_sample(spec, rng);
    const std::string text = serialize(g, spec);
    CHECK(deserialize(text, spec) == g);
    texts.insert(text);
  }
  const auto all = enumerate_all(spec, 1000);
  std::set<std::string> all_texts;
  for (const Genome& g : all) all_texts.insert(serialize(g, spec));
  CHECK(all_texts.size() == all.size());
}

TEST_CASE("deserialize rejects bad input") {
  const SearchSpaceSpec spec = small_spec();
  CounterRng rng(4);
  const std::string good = serialize(random_sample(spec, rng), spec);
  CHECK_THROWS_AS(deserialize("not json", spec), ParseError);

  std::string wrong_hash = good;
  const auto pos = wrong_hash.find(spec.space_hash_hex());
  wrong_hash[pos] = wrong_hash[pos] == 'f' ? '0' : 'f';
  CHECK_THROWS_AS(deserialize(wrong_hash, spec), SpaceMismatch);

  const std::string out_of_range = "{\"choices\":[5,[1,4]],\"space\":\"" +
                                   spec.space_hash_hex() + "\",\"v\":1}";
  CHECK_THROWS_AS(deserialize(out_of_range, spec), RangeError);
}

TEST_CASE("enumerate_all lists each genome exactly once, in a fixed order") {
  const SearchSpaceSpec spec(SpaceNode::list(
      {SpaceNode::one_of(2, "a"), SpaceNode::one_of(3, "b")}));
  const auto all = enumerate_all(spec, 100);
  REQUIRE(all.size() == 6);
  std::set<std::string> unique;
  for (const Genome& g : all) unique.insert(serialize(g, spec));
  CHECK(unique.size() == 6);
  CHECK(enumerate_all(spec, 100) == all);

  CHECK(enumerate_all(SearchSpaceSpec(SpaceNode::one_of(1, "z")), 10).size() == 1);
  CHECK_THROWS_AS(enumerate_all(spec, 5), TooLarge);
}

TEST_CASE("enumeration size always equals cardinality") {
  for (const SearchSpaceSpec& spec :
       {small_spec(),
        SearchSpaceSpec(SpaceNode::many_of(4, 2, /*distinct=*/false, "t")),
        SearchSpaceSpec(SpaceNode::list({SpaceNode::one_of(4, "a"),
                                         SpaceNode::many_of(6, 3, true, "b")}))}) {
    CHECK(BigInt(enumerate_all(spec, 1u << 20).size()) == cardinality(spec));
  }
}
