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
#include <vector>

#include <doctest.h>

#include "esenas/errors.hpp"
#include "esenas/es_core.hpp"

using namespace esenas;

TEST_CASE("perturbation seeds are stateless and collision-free in practice") {
  CHECK(perturbation_seed(1, 2, 3) == perturbation_seed(1, 2, 3));
  CHECK(perturbation_seed(1, 2, 3) != perturbation_seed(1, 2, 4));
  CHECK(perturbation_seed(1, 2, 3) != perturbation_seed(1, 3, 3));
  CHECK(perturbation_seed(1, 2, 3) != perturbation_seed(2, 2, 3));
  const auto seeds = sample_perturbations(5, 7, 50);
  REQUIRE(seeds.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(seeds[i] == perturbation_seed(5, 7, i));
}

TEST_CASE("antithetic directions reconstruct identically from the seed") {
  const auto g1 = gaussian_vector(perturbation_seed(0, 0, 0), 64);
  const auto g2 = gaussian_vector(perturbation_seed(0, 0, 0), 64);
  CHECK(g1 == g2);
  // The pair (+g, -g) sums to zero by construction of the sign flag.
  std::vector<double> sum(64, 0.0);
  for (std::size_t i = 0; i < 64; ++i) sum[i] = g1[i] + -g1[i];
  for (double s : sum) CHECK(s == 0.0);
}

TEST_CASE("linear objectives give the exact directional derivative") {
  // f(theta) = 3 * theta[0], one perturbation g = e1, sigma = 0.1:
  // v = (f(theta + sigma g) - f(theta - sigma g)) / 2 = 0.3.
  const double sigma = 0.1;
  const std::vector<std::vector<double>> gs{{1.0, 0.0, 0.0}};
  const std::vector<double> vs{0.5 * (3 * sigma - (-3 * sigma))};
  const auto grad = es_gradient(vs, gs, sigma);
  CHECK(std::abs(grad[0] - 3.0) < 1e-12);
  CHECK(grad[1] == 0.0);
  CHECK(grad[2] == 0.0);
}

TEST_CASE("general linear objective recovers c exactly from any directions") {
  const std::vector<double> c{2.0, -1.5, 0.25, 4.0};
  const double sigma = 0.05;
  std::vector<std::vector<double>> gs;
  std::vector<double> vs;
  for (int i = 0; i < 6; ++i) {
    gs.push_back(gaussian_vector(perturbation_seed(9, 0, i), c.size()));
    double dot = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) dot += c[j] * gs.back()[j];
    vs.push_back(sigma * dot);  // (f(+)-f(-))/2 for linear f
  }
  // Single-pair estimate: (c . g) g; check the batch form runs and each
  // single-pair estimate projects exactly.
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const auto grad = es_gradient(std::vector<double>{vs[i]},
                                  {gs[i]}, sigma);
    double dot = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) dot += c[j] * gs[i][j];
    for (std::size_t j = 0; j < c.size(); ++j)
      CHECK(std::abs(grad[j] - dot * gs[i][j]) < 1e-12);
  }
}

TEST_CASE("es_gradient edge cases") {
  CHECK_THROWS_AS(es_gradient({}, {}, 0.1), EmptyBatch);
  const auto zero = es_gradient(std::vector<double>{0.0, 0.0},
                                {{1.0, 2.0}, {3.0, 4.0}}, 0.1);
  CHECK(zero == std::vector<double>{0.0, 0.0});
}

TEST_CASE("estimator cosine similarity on the quadratic exceeds 0.9") {
  // f(theta) = -|theta|^2 at theta = e1: true gradient -2 e1.
  const int d = 10, n = 1000;
  const double sigma = 0.01;
  std::vector<double> theta(d, 0.0);
  theta[0] = 1.0;
  auto f = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return -s;
  };
  double mean_cos = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::vector<std::vector<double>> gs;
    std::vector<double> vs;
    for (int i = 0; i < n; ++i) {
      auto g = gaussian_vector(perturbation_seed(seed, 0, i), d);
      std::vector<double> plus = theta, minus = theta;
      for (int j = 0; j < d; ++j) {
        plus[j] += sigma * g[j];
        minus[j] -= sigma * g[j];
      }
      vs.push_back(0.5 * (f(plus) - f(minus)));
      gs.push_back(std::move(g));
    }
    const auto grad = es_gradient(vs, gs, sigma);
    double dot = -2.0 * grad[0], norm = 0.0;
    for (double v : grad) norm += v * v;
    mean_cos += dot / (2.0 * std::sqrt(norm));
  }
  mean_cos /= 20.0;
  CHECK(mean_cos >= 0.9);
}

TEST_CASE("weight_update arithmetic and reward normalization") {
  const std::vector<double> theta{1.0, 2.0};
  CHECK(weight_update(theta, std::vector<double>{0.0, 0.0}, 0.01, 1.0) == theta);
  const auto moved = weight_update(theta, std::vector<double>{3.0, 0.0}, 0.01, 1.0);
  CHECK(moved[0] == doctest::Approx(1.03));
  CHECK(moved[1] == 2.0);
}

TEST_CASE("the applied update is invariant to positive objective rescaling") {
  // Scaling all v_i by 10 scales both gradient and reward_std by 10.
  const std::vector<double> vs{0.5, -0.25, 1.0};
  std::vector<double> vs10 = vs;
  for (auto& v : vs10) v *= 10.0;
  const std::vector<std::vector<double>> gs{{1.0, 0.5}, {-0.5, 2.0}, {0.0, 1.0}};
  const std::vector<double> theta{0.0, 0.0};
  const auto a = weight_update(theta, es_gradient(vs, gs, 0.1), 0.01,
                               reward_std(vs));
  const auto b = weight_update(theta, es_gradient(vs10, gs, 0.1), 0.01,
                               reward_std(vs10));
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
}

TEST_CASE("weight_update rejects non-finite results") {
  const std::vector<double> theta{1.0};
  const std::vector<double> inf_grad{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(weight_update(theta, inf_grad, 0.01, 1.0), NonFiniteUpdate);
}

TEST_CASE("hybrid objective matches the budget-penalty formula") {
  CHECK(hybrid_objective(100.0, 128, 64) == doctest::Approx(50.0));
  CHECK(hybrid_objective(100.0, 32, 64) == 100.0);   // omega = 0 branch
  CHECK(hybrid_objective(100.0, 64, 64) == 100.0);   // identity at the budget
  CHECK(hybrid_objective(-50.0, 128, 64) == doctest::Approx(-100.0));
  CHECK(hybrid_objective(0.0, 128, 64) == 0.0);
  CHECK_THROWS_AS(hybrid_objective(1.0, 5, 0), RangeError);
  CHECK_THROWS_AS(hybrid_objective(1.0, -1, 4), RangeError);
}

TEST_CASE("hybrid objective is the identity whenever E_m <= E_T") {
  for (int e = 0; e <= 16; ++e) {
    CHECK(hybrid_objective(3.5, e, 16) == 3.5);
    CHECK(hybrid_objective(-3.5, e, 16) == -3.5);
  }
}

TEST_CASE("subsample_feedback draws a uniform subset without replacement") {
  std::vector<Feedback> results(150);
  for (int i = 0; i < 150; ++i) results[i].iteration = i;
  CounterRng rng(1);

  CHECK(subsample_feedback(results, 150, rng).size() == 150);
  CHECK_THROWS_AS(subsample_feedback(results, 0, rng), RangeError);
  CHECK_THROWS_AS(subsample_feedback(results, 151, rng), RangeError);

  const auto ten = subsample_feedback(results, 10, rng);
  REQUIRE(ten.size() == 10);
  for (std::size_t i = 1; i < ten.size(); ++i)
    CHECK(ten[i - 1].iteration < ten[i].iteration);  // distinct, order kept

  // Inclusion frequency of element 0 over many draws: hypergeometric mean
  // k/n = 1/15; 3 sigma over 10^4 trials is ~75.
  int hits = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    for (const Feedback& f : subsample_feedback(results, 10, rng))
      hits += f.iteration == 0;
  }
  CHECK(std::abs(hits - trials / 15) < 75);
}

TEST_CASE("config invariants are enforced") {
  ESConfig config;
  CHECK(config.num_workers() == 150);
  config.validate();
  config.sigma = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.sigma = 0.1;
  config.num_distinct_perturbations = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
