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

#ifndef DPFBO_WEIGHTS_HPP
#define DPFBO_WEIGHTS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpfbo/domain.hpp"

namespace dpfbo {

/// Per-sub-region softmax agent weights,
///   w^(i)_n = exp((a I^(i)_n + 1)/T_t) / sum_n exp((a I^(i)_n + 1)/T_t),
/// with the temperature T_t = a / (a_t - 1) driven by a piecewise-linear
/// a_t profile: hold `hold_value` for `hold_len` rounds, then decay linearly
/// to 1 across `decay_len` rounds (both endpoints included, matching the
/// printed schedule a_t = 16, 12.25, 8.5, 4.75, 1), then stay at 1, which
/// maps to infinite temperature and exactly uniform weights.
struct WeightSchedule {
  enum class Mode { kAdaptive, kFixedTemperature, kUniform };

  double sharpness = 15.0;  // a
  double hold_value = 16.0;
  int hold_len = 5;
  int decay_len = 5;
  Mode mode = Mode::kAdaptive;

  static WeightSchedule synthetic() { return WeightSchedule{}; }

  static WeightSchedule real() {
    WeightSchedule s;
    s.hold_len = 10;
    s.decay_len = 30;
    return s;
  }
};

inline double sharpness_at(const WeightSchedule& sched, int t) {
  if (t < 1) throw std::invalid_argument("weights: t must be >= 1");
  if (t <= sched.hold_len) return sched.hold_value;
  const int k = t - sched.hold_len;  // 1-based index into the decay segment
  if (k <= sched.decay_len) {
    if (sched.decay_len == 1) return 1.0;
    return sched.hold_value +
           (k - 1) * (1.0 - sched.hold_value) / (sched.decay_len - 1);
  }
  return 1.0;
}

/// Temperature T_t; a_t = 1 maps to the symbolic infinite temperature.
/// Fixed-temperature mode (the non-adaptive ablation) pins T_t = 1.
inline double temperature(int t, const WeightSchedule& sched) {
  if (sched.mode == WeightSchedule::Mode::kFixedTemperature) return 1.0;
  const double a_t = sharpness_at(sched, t);
  if (a_t <= 1.0) return std::numeric_limits<double>::infinity();
  return sched.sharpness / (a_t - 1.0);
}

struct WeightMatrix {
  Eigen::MatrixXd w;  // P x N, rows sum to 1
  double phi_max = 0.0;
};

/// Round-t weight matrix for the given assignment. Softmax rows only take
/// two distinct values (assigned / unassigned), computed with
/// max-subtraction so arbitrarily small temperatures cannot overflow.
inline WeightMatrix weights(const Assignment& assignment, int t,
                            const WeightSchedule& sched) {
  const int num_agents = assignment.num_agents();
  const int num_regions = assignment.num_regions();
  if (num_agents < 1) throw std::invalid_argument("weights: N must be >= 1");
  WeightMatrix out;
  out.w.resize(num_regions, num_agents);

  const double temp = temperature(t, sched);
  if (sched.mode == WeightSchedule::Mode::kUniform || std::isinf(temp)) {
    out.w.setConstant(1.0 / num_agents);
    out.phi_max = 1.0 / num_agents;
    return out;
  }

  // Logits are (a + 1)/T for assigned agents and 1/T otherwise.
  const double hi = (sched.sharpness + 1.0) / temp;
  const double lo = 1.0 / temp;
  const double e_hi = std::exp(hi - hi);            // 1 after max-subtraction
  const double e_lo = std::exp(lo - hi);
  for (int i = 0; i < num_regions; ++i) {
    const int assigned = assignment.counts[i];
    const double norm = assigned * e_hi + (num_agents - assigned) * e_lo;
    const double w_hi = e_hi / norm;
    const double w_lo = e_lo / norm;
    for (int n = 0; n < num_agents; ++n)
      out.w(i, n) = assignment.region_of_agent[n] == i ? w_hi : w_lo;
  }
  out.phi_max = out.w.maxCoeff();
  return out;
}

}  // namespace dpfbo

#endif  // DPFBO_WEIGHTS_HPP
