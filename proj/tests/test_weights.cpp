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

#include <cmath>
#include <set>

#include "dpfbo/weights.hpp"

using namespace dpfbo;

namespace {
Assignment fixed_assignment(int num_agents, int num_regions) {
  Assignment a;
  a.counts.assign(num_regions, 0);
  for (int n = 0; n < num_agents; ++n) {
    a.region_of_agent.push_back(n % num_regions);
    ++a.counts[n % num_regions];
  }
  return a;
}
}  // namespace

TEST_CASE("synthetic temperature profile reproduces the printed values") {
  const WeightSchedule sched = WeightSchedule::synthetic();
  // a_t = 16 through the hold, then 16, 12.25, 8.5, 4.75, 1 over the decay
  REQUIRE(sharpness_at(sched, 1) == 16.0);
  REQUIRE(sharpness_at(sched, 5) == 16.0);
  REQUIRE(sharpness_at(sched, 6) == 16.0);
  REQUIRE(sharpness_at(sched, 7) == 12.25);
  REQUIRE(sharpness_at(sched, 8) == 8.5);
  REQUIRE(sharpness_at(sched, 9) == 4.75);
  REQUIRE(sharpness_at(sched, 10) == 1.0);
  REQUIRE(sharpness_at(sched, 11) == 1.0);

  REQUIRE(temperature(3, sched) == Catch::Approx(1.0));       // 15/15
  REQUIRE(temperature(8, sched) == Catch::Approx(2.0));       // 15/7.5
  REQUIRE(std::isinf(temperature(10, sched)));
  REQUIRE(std::isinf(temperature(11, sched)));
}

TEST_CASE("real preset holds 10 rounds and decays over 30") {
  const WeightSchedule sched = WeightSchedule::real();
  REQUIRE(sharpness_at(sched, 10) == 16.0);
  REQUIRE(sharpness_at(sched, 11) == 16.0);
  REQUIRE(sharpness_at(sched, 40) == 1.0);
  REQUIRE(std::isinf(temperature(41, sched)));
  // strictly decreasing inside the decay window
  for (int t = 12; t <= 40; ++t)
    REQUIRE(sharpness_at(sched, t) < sharpness_at(sched, t - 1));
}

TEST_CASE("infinite temperature yields exactly uniform weights") {
  const Assignment a = fixed_assignment(10, 2);
  WeightSchedule sched = WeightSchedule::synthetic();
  const WeightMatrix wm = weights(a, 11, sched);
  for (int i = 0; i < 2; ++i)
    for (int n = 0; n < 10; ++n) REQUIRE(wm.w(i, n) == 0.1);
  REQUIRE(wm.phi_max == 0.1);
}

TEST_CASE("two-agent softmax example") {
  const Assignment a = fixed_assignment(2, 2);
  const WeightMatrix wm = weights(a, 1, WeightSchedule::synthetic());
  // assigned-agent weight = e^16 / (e^16 + e^1) = 1 / (1 + e^-15)
  REQUIRE(wm.w(0, 0) == Catch::Approx(1.0 / (1.0 + std::exp(-15.0))));
  REQUIRE(wm.w(0, 1) == Catch::Approx(std::exp(-15.0) /
                                      (1.0 + std::exp(-15.0))));
}

TEST_CASE("assigned-to-unassigned ratio is e^a at unit temperature") {
  const Assignment a = fixed_assignment(200, 2);
  const WeightMatrix wm = weights(a, 1, WeightSchedule::synthetic());
  REQUIRE(wm.w(0, 0) / wm.w(0, 1) == Catch::Approx(std::exp(15.0)));
  REQUIRE(wm.w(1, 1) / wm.w(1, 0) == Catch::Approx(std::exp(15.0)));
}

TEST_CASE("rows are stochastic and phi_max is in [1/N, 1)") {
  for (int N : {1, 2, 7, 64}) {
    for (int P : {1, 2, 4}) {
      if (N < P) continue;
      const Assignment a = fixed_assignment(N, P);
      for (int t : {1, 3, 7, 9, 12, 40}) {
        const WeightMatrix wm = weights(a, t, WeightSchedule::synthetic());
        for (int i = 0; i < P; ++i) {
          REQUIRE(wm.w.row(i).sum() == Catch::Approx(1.0).margin(1e-12));
          for (int n = 0; n < N; ++n) REQUIRE(wm.w(i, n) > 0.0);
        }
        REQUIRE(wm.phi_max >= 1.0 / N - 1e-15);
        if (N > 1) REQUIRE(wm.phi_max < 1.0);
      }
    }
  }
}

TEST_CASE("weights converge exactly to uniform after the decay") {
  const Assignment a = fixed_assignment(50, 4);
  for (int t = 11; t <= 45; ++t) {
    const WeightMatrix wm = weights(a, t, WeightSchedule::synthetic());
    REQUIRE((wm.w.array() - 1.0 / 50).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("each region row takes exactly two values") {
  const Assignment a = fixed_assignment(30, 3);
  const WeightMatrix wm = weights(a, 2, WeightSchedule::synthetic());
  for (int i = 0; i < 3; ++i) {
    std::set<double> distinct;
    for (int n = 0; n < 30; ++n) distinct.insert(wm.w(i, n));
    REQUIRE(distinct.size() == 2);
  }
}

TEST_CASE("softmax survives extreme sharpness-to-temperature ratios") {
  WeightSchedule sched;
  sched.sharpness = 1000.0;
  sched.hold_value = 1001.0;
  sched.hold_len = 5;
  sched.decay_len = 5;
  // temperature = 1000/1000 = 1, logit gap = 1000
  const Assignment a = fixed_assignment(8, 2);
  const WeightMatrix wm = weights(a, 1, sched);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(std::isfinite(wm.w.row(i).sum()));
    REQUIRE(wm.w.row(i).sum() == Catch::Approx(1.0).margin(1e-12));
  }
  // assigned agents absorb all mass
  REQUIRE(wm.w(0, 0) == Catch::Approx(0.25));
}

TEST_CASE("fixed-temperature mode freezes the matrix over time") {
  WeightSchedule sched = WeightSchedule::synthetic();
  sched.mode = WeightSchedule::Mode::kFixedTemperature;
  const Assignment a = fixed_assignment(20, 2);
  const WeightMatrix first = weights(a, 1, sched);
  for (int t : {2, 5, 10, 15, 40}) {
    const WeightMatrix wm = weights(a, t, sched);
    REQUIRE((wm.w - first.w).lpNorm<Eigen::Infinity>() == 0.0);
  }
  REQUIRE(first.w(0, 0) / first.w(0, 1) == Catch::Approx(std::exp(15.0)));
}

TEST_CASE("uniform mode ignores the schedule entirely") {
  WeightSchedule sched = WeightSchedule::synthetic();
  sched.mode = WeightSchedule::Mode::kUniform;
  const Assignment a = fixed_assignment(20, 4);
  for (int t : {1, 7, 30}) {
    const WeightMatrix wm = weights(a, t, sched);
    REQUIRE((wm.w.array() - 0.05).abs().maxCoeff() == 0.0);
  }
}
