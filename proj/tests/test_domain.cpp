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

#include "dpfbo/domain.hpp"

using namespace dpfbo;

TEST_CASE("1-D grid is equally spaced and includes both endpoints") {
  const Domain d = build_grid(1000);
  REQUIRE(d.size() == 1000);
  REQUIRE(d.grid(0, 0) == 0.0);
  REQUIRE(d.grid(999, 0) == 1.0);
  const double h = 1.0 / 999.0;
  for (int i = 1; i < 1000; ++i)
    REQUIRE(d.grid(i, 0) - d.grid(i - 1, 0) == Catch::Approx(h).epsilon(1e-12));

  const Domain two = build_grid(2);
  REQUIRE(two.grid(0, 0) == 0.0);
  REQUIRE(two.grid(1, 0) == 1.0);
}

TEST_CASE("tensor grid ids start at the lower corner") {
  const Domain d = build_grid(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, 9);
  REQUIRE(d.size() == 81);
  REQUIRE(d.grid(0, 0) == 0.0);
  REQUIRE(d.grid(0, 1) == 0.0);
  REQUIRE(d.grid(80, 0) == 1.0);
  REQUIRE(d.grid(80, 1) == 1.0);
}

TEST_CASE("grid construction rejects bad input") {
  REQUIRE_THROWS_AS(build_grid(0), std::invalid_argument);
  REQUIRE_THROWS_AS(build_grid(1, {{{1.0, 0.0}}}, 10), std::invalid_argument);
  REQUIRE_THROWS_AS(build_grid(2, {{{0.0, 1.0}}}, 10), std::invalid_argument);
}

TEST_CASE("P=4 partition of the unit square reproduces the printed layout") {
  const Domain d = build_grid(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, 9);
  const Partition p = partition(d, 4);
  REQUIRE(p.regions.size() == 4);
  // X_1 = [0,.5) x [0,.5), X_2 = [0,.5) x [.5,1], X_3 = [.5,1] x [0,.5),
  // X_4 = [.5,1] x [.5,1].
  const double expect[4][2][2] = {{{0.0, 0.5}, {0.0, 0.5}},
                                  {{0.0, 0.5}, {0.5, 1.0}},
                                  {{0.5, 1.0}, {0.0, 0.5}},
                                  {{0.5, 1.0}, {0.5, 1.0}}};
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 2; ++k) {
      REQUIRE(p.regions[r][k][0] == expect[r][k][0]);
      REQUIRE(p.regions[r][k][1] == expect[r][k][1]);
    }
}

TEST_CASE("P=1 keeps the whole box") {
  const Domain d = build_grid(3, {{{0.0, 1.0}}, {{0.0, 1.0}}, {{0.0, 1.0}}}, 4);
  const Partition p = partition(d, 1);
  REQUIRE(p.regions.size() == 1);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(p.regions[0][k][0] == 0.0);
    REQUIRE(p.regions[0][k][1] == 1.0);
  }
}

TEST_CASE("D=3, P=4 splits the first two dimensions only") {
  const Domain d = build_grid(3, {{{0.0, 1.0}}, {{0.0, 1.0}}, {{0.0, 1.0}}}, 5);
  const Partition p = partition(d, 4);
  REQUIRE(p.cells_per_dim == std::vector<int>{2, 2, 1});
  for (const auto& region : p.regions) {
    REQUIRE(region[2][0] == 0.0);
    REQUIRE(region[2][1] == 1.0);
  }
}

TEST_CASE("non-power-of-two P rejected above one dimension") {
  const Domain d = build_grid(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, 5);
  REQUIRE_THROWS_WITH(partition(d, 3),
                      Catch::Matchers::ContainsSubstring("power of two"));
}

TEST_CASE("1-D domains accept any region count") {
  const Domain d = build_grid(999);
  const Partition p = partition(d, 3);
  REQUIRE(p.regions.size() == 3);
  REQUIRE(p.regions[0][0][1] == Catch::Approx(1.0 / 3.0));
  REQUIRE(p.regions[1][0][0] == Catch::Approx(1.0 / 3.0));
  REQUIRE(p.regions[2][0][1] == 1.0);
}

TEST_CASE("split-plane points belong to the upper box") {
  const Domain d1 = build_grid(11);
  const Partition p1 = partition(d1, 2);
  Eigen::VectorXd x(1);
  x << 0.5;
  REQUIRE(p1.region_of(x) == 1);
  x << 0.0;
  REQUIRE(p1.region_of(x) == 0);
  x << 1.0;
  REQUIRE(p1.region_of(x) == 1);

  const Domain d2 = build_grid(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, 5);
  const Partition p2 = partition(d2, 4);
  Eigen::VectorXd y(2);
  y << 0.49, 0.51;  // [0,.5) x [.5,1] -> region 1
  REQUIRE(p2.region_of(y) == 1);

  y << 1.5, 0.5;
  REQUIRE_THROWS_AS(p2.region_of(y), std::invalid_argument);
}

TEST_CASE("every grid point lies in exactly one region") {
  for (int dims : {1, 2, 3}) {
    const Domain d = dims == 1
                         ? build_grid(257)
                         : build_grid(dims,
                                      std::vector<std::array<double, 2>>(
                                          dims, {0.0, 1.0}),
                                      dims == 2 ? 17 : 7);
    for (int P : {1, 2, 4, 8, 16}) {
      const Partition p = partition(d, P);
      std::vector<int> hits(P, 0);
      for (int id = 0; id < d.size(); ++id) {
        // geometric and precomputed lookups agree
        REQUIRE(p.region_of(d.point(id)) == p.region_of_point[id]);
        ++hits[p.region_of_point[id]];
      }
      int total = 0;
      for (int h : hits) total += h;
      REQUIRE(total == d.size());
    }
  }
}

TEST_CASE("region volumes sum to the bounding-box volume") {
  const Domain d = build_grid(3, {{{0.0, 1.0}}, {{0.0, 1.0}}, {{0.0, 1.0}}}, 3);
  for (int P : {1, 2, 4, 8, 16}) {
    const Partition p = partition(d, P);
    double sum = 0.0;
    double expected_each = 1.0 / P;
    for (const auto& region : p.regions) {
      double v = 1.0;
      for (const auto& iv : region) v *= iv[1] - iv[0];
      REQUIRE(v == Catch::Approx(expected_each).epsilon(1e-12));
      sum += v;
    }
    REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("agent assignment is balanced and seed-deterministic") {
  {
    auto eng = rng::derive(7, rng::Stream::kAssignment);
    const Assignment a = assign_agents(200, 2, eng);
    REQUIRE(a.counts == std::vector<int>{100, 100});
  }
  {
    auto eng = rng::derive(7, rng::Stream::kAssignment);
    const Assignment a = assign_agents(5, 2, eng);
    REQUIRE(a.counts == std::vector<int>{3, 2});
  }
  {
    auto eng = rng::derive(7, rng::Stream::kAssignment);
    const Assignment a = assign_agents(50, 4, eng);
    REQUIRE(a.counts == std::vector<int>{13, 13, 12, 12});
  }
  {
    auto e1 = rng::derive(42, rng::Stream::kAssignment);
    auto e2 = rng::derive(42, rng::Stream::kAssignment);
    REQUIRE(assign_agents(97, 5, e1).region_of_agent ==
            assign_agents(97, 5, e2).region_of_agent);
  }
  // counts never differ by more than one
  for (int P = 1; P <= 16; ++P) {
    for (int N : {P, P + 1, 3 * P + 2, 256}) {
      auto eng = rng::derive(N * 31 + P, rng::Stream::kAssignment);
      const Assignment a = assign_agents(N, P, eng);
      int lo = N, hi = 0, total = 0;
      for (int c : a.counts) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        total += c;
      }
      REQUIRE(total == N);
      REQUIRE(hi - lo <= 1);
    }
  }
}

TEST_CASE("partition serializes region intervals") {
  const Domain d = build_grid(5);
  const auto j = partition(d, 2).to_json();
  REQUIRE(j.size() == 2);
  REQUIRE(j[0][0][0] == 0.0);
  REQUIRE(j[0][0][1] == 0.5);
  REQUIRE(j[1][0][1] == 1.0);
}
