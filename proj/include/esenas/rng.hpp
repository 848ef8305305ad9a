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

#ifndef ESENAS_RNG_HPP_
#define ESENAS_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace esenas {

// SplitMix64 finalizer. Used both as the hash mixer and as the counter-based
// stream below, so aggregator and workers reconstruct identical randomness
// from a 64-bit seed without shared state.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL));
}

// Counter-based random stream keyed by a 64-bit seed. Deterministic across
// processes and platforms; no global state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed)) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix_seeds(seed, stream)) {}

  std::uint64_t next_u64() { return splitmix64(key_ + counter_++); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Requires n >= 1.
  int next_int(int n);

  // Standard normal via Box-Muller.
  double next_gaussian();

  std::uint64_t next_seed() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// The d-dimensional N(0, I) vector identified by `seed`. Both the aggregator
// and any worker produce bitwise-identical output for the same seed.
std::vector<double> gaussian_vector(std::uint64_t seed, std::size_t d);

}  // namespace esenas

#endif  // ESENAS_RNG_HPP_
