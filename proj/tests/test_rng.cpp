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

#include "esenas/rng.hpp"

using namespace esenas;

TEST_CASE("same seed produces a bitwise-identical gaussian vector") {
  const auto a = gaussian_vector(42, 257);
  const auto b = gaussian_vector(42, 257);
  REQUIRE(a.size() == 257);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("different seeds and streams decorrelate") {
  CHECK(gaussian_vector(1, 8) != gaussian_vector(2, 8));
  CounterRng a(7, 0), b(7, 1);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("gaussian moments match the standard normal within CLT bounds") {
  const int n = 10000;
  CounterRng rng(123);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_gaussian();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("gaussian values are always finite") {
  CounterRng rng(99);
  for (int i = 0; i < 100000; ++i) CHECK(std::isfinite(rng.next_gaussian()));
}

TEST_CASE("next_int stays in range and covers all residues") {
  CounterRng rng(5);
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) {
    const int x = rng.next_int(7);
    REQUIRE(x >= 0);
    REQUIRE(x < 7);
    seen.insert(x);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("next_double lies in [0, 1)") {
  CounterRng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("mix_seeds is order-sensitive and deterministic") {
  CHECK(mix_seeds(1, 2) == mix_seeds(1, 2));
  CHECK(mix_seeds(1, 2) != mix_seeds(2, 1));
  CHECK(splitmix64(0) == splitmix64(0));
  CHECK(splitmix64(0) != splitmix64(1));
}
