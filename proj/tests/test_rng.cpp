// Copyright 2026 The dpfbo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpfbo/rng.hpp"

using namespace dpfbo::rng;

TEST_CASE("identical derivation paths give identical streams") {
  auto a = derive(42, Stream::kAgentRound, {7, 3});
  auto b = derive(42, Stream::kAgentRound, {7, 3});
  for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
}

TEST_CASE("distinct paths give distinct streams") {
  auto base = derive(42, Stream::kAgentRound, {7, 3});
  const std::uint64_t first = base();
  for (auto other : {derive(42, Stream::kAgentRound, {7, 4}),
                     derive(42, Stream::kAgentRound, {3, 7}),
                     derive(42, Stream::kNoise, {7, 3}),
                     derive(43, Stream::kAgentRound, {7, 3})})
    REQUIRE(other() != first);
}

TEST_CASE("u01 stays inside the open unit interval") {
  auto eng = derive(1, Stream::kTest);
  for (int i = 0; i < 100000; ++i) {
    const double u = u01(eng);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal variates have unit moments") {
  auto eng = derive(2, Stream::kTest);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = normal(eng);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
  // var of the sample variance of a normal is ~2/n
  REQUIRE(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("uniform_int respects bounds and is roughly uniform") {
  auto eng = derive(3, Stream::kTest);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = uniform_int(eng, 7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) {
    // 5 sigma band around n/7
    const double expected = n / 7.0;
    REQUIRE(std::abs(c - expected) <=
            5.0 * std::sqrt(expected * (1.0 - 1.0 / 7.0)));
  }
  REQUIRE(uniform_int(eng, 1) == 0);
}

TEST_CASE("shuffle is a seed-deterministic permutation") {
  std::vector<int> a{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> b = a;
  auto e1 = derive(9, Stream::kTest);
  auto e2 = derive(9, Stream::kTest);
  shuffle(a, e1);
  shuffle(b, e2);
  REQUIRE(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}
