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

#include "dpfbo/accountant.hpp"
#include "dpfbo/rng.hpp"

using namespace dpfbo::accountant;

TEST_CASE("q=0 mechanism leaks nothing") {
  for (int m : {1, 2, 16}) REQUIRE(log_moment(0.0, 1.0, m) == 0.0);
  REQUIRE(epsilon(0.0, 1.0, 100, 1e-3).epsilon == 0.0);
}

TEST_CASE("q=1 log-moments equal the pure-Gaussian closed form") {
  for (double z : {0.5, 2.0}) {
    for (int m : {1, 3, 16, 64}) {
      const double want = m * (m + 1) / (2.0 * z * z);
      REQUIRE(log_moment(1.0, z, m) ==
              Catch::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("subsampled log-moment matches an importance-sampling oracle") {
  // alpha(8) at q=0.01, z=4: check both expectations against Monte Carlo
  // estimates with x ~ N(0, z^2) as the proposal.
  const double q = 0.01, z = 4.0;
  const int m = 8;
  auto eng = dpfbo::rng::derive(2024, dpfbo::rng::Stream::kTest);
  const long samples = 10000000;
  double s1 = 0.0, s1_sq = 0.0, s2 = 0.0, s2_sq = 0.0;
  for (long i = 0; i < samples; ++i) {
    const double x = z * dpfbo::rng::normal(eng);
    const double L =
        std::log1p(q * (std::exp((2.0 * x - 1.0) / (2.0 * z * z)) - 1.0));
    const double e1 = std::exp(-m * L);        // E_{mu0} (mu0/mu)^m
    const double e2 = std::exp((m + 1) * L);   // E_{mu0} (mu/mu0)^{m+1}
    s1 += e1;
    s1_sq += e1 * e1;
    s2 += e2;
    s2_sq += e2 * e2;
  }
  const double mean1 = s1 / samples, mean2 = s2 / samples;
  const double se1 = std::sqrt((s1_sq / samples - mean1 * mean1) / samples);
  const double se2 = std::sqrt((s2_sq / samples - mean2 * mean2) / samples);
  const double alpha = log_moment(q, z, m);
  const double target = std::exp(alpha);
  REQUIRE(target <= std::max(mean1, mean2) + 3.0 * std::max(se1, se2));
  REQUIRE(target >= std::max(mean1, mean2) - 3.0 * std::max(se1, se2));
}

TEST_CASE("reference privacy loss at T=40") {
  const double delta = delta_default(200);
  REQUIRE(delta == Catch::Approx(std::pow(200.0, -1.1)));
  const auto r = epsilon(0.25, 1.0, 40, delta);
  REQUIRE(r.epsilon == Catch::Approx(9.91).epsilon(0.05));
  REQUIRE(r.order >= 1);
}

TEST_CASE("delta default and boundary behavior") {
  REQUIRE(delta_default(200) == std::pow(200.0, -1.1));
  REQUIRE(delta_default(200) == Catch::Approx(2.948e-3).epsilon(5e-3));
  REQUIRE(delta_default(29) == Catch::Approx(std::pow(29.0, -1.1)));
  REQUIRE(delta_default(1) == 1.0);
  REQUIRE_THROWS_AS(epsilon(0.5, 1.0, 10, delta_default(1)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(delta_default(0), std::invalid_argument);
  REQUIRE_THROWS_AS(log_moment(1.5, 1.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(log_moment(0.5, 0.0, 1), std::invalid_argument);
}

TEST_CASE("no rounds means no loss; composition is subadditive") {
  REQUIRE(epsilon(0.5, 1.0, 0, 1e-3).epsilon == 0.0);
  auto eng = dpfbo::rng::derive(7, dpfbo::rng::Stream::kTest);
  for (int rep = 0; rep < 4; ++rep) {
    const double q = 0.05 + 0.9 * dpfbo::rng::u01(eng);
    const double z = 0.8 + 2.0 * dpfbo::rng::u01(eng);
    const MomentProfile profile = MomentProfile::compute(q, z, 32);
    const int T0 = 5 + static_cast<int>(dpfbo::rng::uniform_int(eng, 20));
    const double e1 = epsilon_from_profile(profile, T0, 1e-3).epsilon;
    const double e2 = epsilon_from_profile(profile, 2 * T0, 1e-3).epsilon;
    REQUIRE(e2 <= 2.0 * e1 + 1e-12);
    REQUIRE(e2 >= e1 - 1e-12);
    const double single = epsilon_from_profile(profile, 1, 1e-3).epsilon;
    REQUIRE(e1 <= T0 * single + 1e-12);
  }
}

TEST_CASE("epsilon monotone in T and q, antitone in z") {
  const double delta = 1e-3;
  double prev = 0.0;
  for (int T : {1, 5, 20, 80}) {
    const double e = epsilon(0.25, 1.0, T, delta, 32).epsilon;
    REQUIRE(e >= prev);
    prev = e;
  }
  prev = 0.0;
  for (double q : {0.05, 0.15, 0.35, 0.7, 1.0}) {
    const double e = epsilon(q, 1.0, 20, delta, 32).epsilon;
    REQUIRE(e >= prev - 1e-12);
    prev = e;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double z : {0.6, 1.0, 1.5, 2.5, 4.0}) {
    const double e = epsilon(0.25, z, 20, delta, 32).epsilon;
    REQUIRE(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("log-moments nondecreasing in q at fixed order") {
  for (int m : {1, 4, 16}) {
    double prev = 0.0;
    for (double q : {0.0, 0.05, 0.2, 0.5, 0.8, 1.0}) {
      const double a = log_moment(q, 1.2, m);
      REQUIRE(a >= prev - 1e-10);
      prev = a;
    }
  }
}

TEST_CASE("quadrature is stable under doubled resolution") {
  for (double q : {0.15, 0.25, 0.5}) {
    for (double z : {1.0, 1.5}) {
      for (int m : {1, 8, 32, 64}) {
        const double coarse = log_moment(q, z, m, 2001);
        const double fine = log_moment(q, z, m, 4001);
        const double scale = std::max(std::abs(fine), 1e-6);
        REQUIRE(std::abs(fine - coarse) / scale < 1e-8);
      }
    }
  }
}

TEST_CASE("ledger accumulates rounds") {
  PrivacyLedger ledger = PrivacyLedger::open(0.15, 1.0, delta_default(200));
  REQUIRE(ledger.current().epsilon == 0.0);
  double prev = 0.0;
  for (int t = 1; t <= 40; ++t) {
    ledger.record_round();
    const double e = ledger.current().epsilon;
    REQUIRE(e >= prev);
    prev = e;
  }
  // reference value for q=0.15, z=1 after 40 rounds
  REQUIRE(prev == Catch::Approx(5.93).epsilon(0.05));
}
