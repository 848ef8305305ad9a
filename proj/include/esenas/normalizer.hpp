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

#ifndef ESENAS_NORMALIZER_HPP_
#define ESENAS_NORMALIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace esenas {

// Welford running mean/variance over observed state vectors. Partial
// statistics from independent rollouts merge associatively, so workers
// accumulate locally and the aggregator combines.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(std::size_t dim)
      : mean_(dim, 0.0), m2_(dim, 0.0) {}

  static RunningNormalizer from_moments(std::uint64_t count,
                                        std::vector<double> mean,
                                        std::vector<double> m2) {
    RunningNormalizer n;
    n.count_ = count;
    n.mean_ = std::move(mean);
    n.m2_ = std::move(m2);
    return n;
  }

  std::uint64_t count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& m2() const { return m2_; }

  void observe(std::span<const double> s) {
    ensure_dim(s.size());
    ++count_;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double delta = s[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(count_);
      m2_[i] += delta * (s[i] - mean_[i]);
    }
  }

  // Chan et al. parallel combine of two Welford accumulators.
  void merge(const RunningNormalizer& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = other.mean_[i] - mean_[i];
      mean_[i] += delta * nb / n;
      m2_[i] += other.m2_[i] + delta * delta * na * nb / n;
    }
    count_ += other.count_;
  }

  // z = (s - mean) / std with std floored at 1e-8; identity before any
  // statistics have been observed.
  std::vector<double> normalize(std::span<const double> s) const {
    std::vector<double> z(s.begin(), s.end());
    if (count_ == 0) return z;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double var = m2_[i] / static_cast<double>(count_);
      const double sd = std::max(std::sqrt(std::max(var, 0.0)), 1e-8);
      z[i] = (z[i] - mean_[i]) / sd;
    }
    return z;
  }

 private:
  void ensure_dim(std::size_t dim) {
    if (mean_.size() != dim) {
      mean_.assign(dim, 0.0);
      m2_.assign(dim, 0.0);
      count_ = 0;
    }
  }

  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace esenas

#endif  // ESENAS_NORMALIZER_HPP_
