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

#ifndef DPFBO_ACCOUNTANT_HPP
#define DPFBO_ACCOUNTANT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

// Moments accountant for the subsampled Gaussian mechanism with sensitivity
// normalized to 1. With mu0 = N(0, z^2), mu1 = N(1, z^2) and the mixture
// mu = (1-q) mu0 + q mu1, the per-step log-moment of order m is
//
//   alpha(m) = log max( E_{x~mu0} (mu0/mu)^m , E_{x~mu} (mu/mu0)^m ).
//
// Both expectations reduce to integrals of the form
//   I(c) = int g0(x) exp(c L(x)) dx,  L(x) = log(mu(x)/mu0(x)),
// with c = -m (first) and c = m+1 (second). Under composition over T i.i.d.
// rounds, eps(delta) = min_m (T alpha(m) + log(1/delta)) / m.

namespace dpfbo::accountant {

inline constexpr int kDefaultMaxOrder = 64;

namespace detail {

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

struct TiltedIntegrand {
  double q, z, c;
  double log_q, log_1mq, log_norm;

  TiltedIntegrand(double q_, double z_, double c_)
      : q(q_), z(z_), c(c_) {
    log_q = std::log(q);
    log_1mq = q < 1.0 ? std::log1p(-q)
                      : -std::numeric_limits<double>::infinity();
    log_norm = -std::log(z * std::sqrt(2.0 * std::acos(-1.0)));
  }

  // log of g0(x) * exp(c * L(x))
  double log_value(double x) const {
    const double ratio = (2.0 * x - 1.0) / (2.0 * z * z);  // log(mu1/mu0)
    const double L = log_add_exp(log_1mq, log_q + ratio);
    return log_norm - 0.5 * (x / z) * (x / z) + c * L;
  }
};

// Adaptive Simpson on exp(log_value - shift) between two pre-evaluated
// endpoints. Tolerance is absolute in the shifted scale.
template <typename F>
double adaptive_simpson(const F& f, double a, double fa, double b, double fb,
                        double m, double fm, double whole, double tol,
                        int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                          depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                          depth - 1);
}

// log I(c), via a coarse scan (locating the peak and seeding panels)
// followed by per-panel adaptive Simpson on the peak-shifted integrand.
inline double log_tilted_integral(double q, double z, double c,
                                  int scan_points = 4001,
                                  double rel_tol = 1e-10) {
  const TiltedIntegrand integrand(q, z, c);
  // The tilt exp(cL) moves mass toward x ~ c, so the domain must cover the
  // span of 0, 1 and c plus a Gaussian-tail margin.
  const double margin = (20.0 + std::abs(c)) * z;
  const double lo = std::min(0.0, c) - margin;
  const double hi = std::max(1.0, c) + margin;

  std::vector<double> xs(scan_points), ls(scan_points);
  double shift = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan_points; ++i) {
    xs[i] = lo + (hi - lo) * i / (scan_points - 1);
    ls[i] = integrand.log_value(xs[i]);
    shift = std::max(shift, ls[i]);
  }

  const auto f = [&](double x) {
    return std::exp(integrand.log_value(x) - shift);
  };

  // First pass: composite Simpson over scan panels to bootstrap the scale.
  double coarse = 0.0;
  std::vector<double> mids(scan_points - 1), fmids(scan_points - 1);
  for (int i = 0; i + 1 < scan_points; ++i) {
    mids[i] = 0.5 * (xs[i] + xs[i + 1]);
    fmids[i] = f(mids[i]);
    coarse += (xs[i + 1] - xs[i]) / 6.0 *
              (std::exp(ls[i] - shift) + 4.0 * fmids[i] +
               std::exp(ls[i + 1] - shift));
  }
  const double panel_tol =
      rel_tol * std::max(coarse, 1e-300) / (scan_points - 1);

  // compensated accumulation: panel magnitudes span many orders
  double total = 0.0, carry = 0.0;
  for (int i = 0; i + 1 < scan_points; ++i) {
    const double fa = std::exp(ls[i] - shift);
    const double fb = std::exp(ls[i + 1] - shift);
    const double whole =
        (xs[i + 1] - xs[i]) / 6.0 * (fa + 4.0 * fmids[i] + fb);
    const double panel = adaptive_simpson(f, xs[i], fa, xs[i + 1], fb,
                                          mids[i], fmids[i], whole,
                                          panel_tol, 40);
    const double y = panel - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  return shift + std::log(total);
}

}  // namespace detail

/// Per-step log-moment alpha(m) of the subsampled Gaussian mechanism.
inline double log_moment(double q, double z, int m, int scan_points = 4001) {
  if (q < 0.0 || q > 1.0)
    throw std::invalid_argument("accountant: q must be in [0, 1]");
  if (!(z > 0.0)) throw std::invalid_argument("accountant: z must be > 0");
  if (m < 1) throw std::invalid_argument("accountant: order must be >= 1");
  if (q == 0.0) return 0.0;
  const double e1 =
      detail::log_tilted_integral(q, z, -static_cast<double>(m), scan_points);
  const double e2 = detail::log_tilted_integral(
      q, z, static_cast<double>(m) + 1.0, scan_points);
  return std::max(0.0, std::max(e1, e2));
}

/// Per-step log-moments for all orders 1..max_order at fixed (q, z).
struct MomentProfile {
  double q = 0.0;
  double z = 0.0;
  std::vector<double> log_moments;  // index m-1 holds alpha(m)

  static MomentProfile compute(double q, double z,
                               int max_order = kDefaultMaxOrder) {
    if (max_order < 1)
      throw std::invalid_argument("accountant: max order must be >= 1");
    MomentProfile p;
    p.q = q;
    p.z = z;
    p.log_moments.reserve(max_order);
    for (int m = 1; m <= max_order; ++m)
      p.log_moments.push_back(q == 0.0 ? 0.0 : log_moment(q, z, m));
    return p;
  }
};

struct EpsilonResult {
  double epsilon = 0.0;
  int order = 0;  // argmin moment order
};

/// Tail bound eps = min_m (T alpha(m) + log(1/delta)) / m.
inline EpsilonResult epsilon_from_profile(const MomentProfile& profile,
                                          int rounds, double delta) {
  if (rounds < 0) throw std::invalid_argument("accountant: T must be >= 0");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("accountant: delta must be in (0, 1)");
  if (rounds == 0 || profile.q == 0.0) return {0.0, 0};
  EpsilonResult best{std::numeric_limits<double>::infinity(), 0};
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < profile.log_moments.size(); ++i) {
    const int m = static_cast<int>(i) + 1;
    const double eps = (rounds * profile.log_moments[i] + log_inv_delta) / m;
    if (eps < best.epsilon) best = {eps, m};
  }
  return best;
}

inline EpsilonResult epsilon(double q, double z, int rounds, double delta,
                             int max_order = kDefaultMaxOrder) {
  if (rounds == 0 || q == 0.0) {
    if (!(delta > 0.0) || !(delta < 1.0))
      throw std::invalid_argument("accountant: delta must be in (0, 1)");
    return {0.0, 0};
  }
  return epsilon_from_profile(MomentProfile::compute(q, z, max_order), rounds,
                              delta);
}

/// Default failure probability delta = N^{-1.1}.
inline double delta_default(int num_agents) {
  if (num_agents < 1)
    throw std::invalid_argument("accountant: N must be >= 1");
  return std::pow(static_cast<double>(num_agents), -1.1);
}

/// Composition ledger over i.i.d. mechanism invocations. The profile is
/// computed once; every round adds one invocation.
struct PrivacyLedger {
  MomentProfile profile;
  int rounds_elapsed = 0;
  double delta = 0.0;

  static PrivacyLedger open(double q, double z, double delta,
                            int max_order = kDefaultMaxOrder) {
    if (!(delta > 0.0) || !(delta < 1.0))
      throw std::invalid_argument("accountant: delta must be in (0, 1)");
    PrivacyLedger ledger;
    ledger.profile = MomentProfile::compute(q, z, max_order);
    ledger.delta = delta;
    return ledger;
  }

  void record_round() { ++rounds_elapsed; }

  EpsilonResult current() const {
    return epsilon_from_profile(profile, rounds_elapsed, delta);
  }
};

}  // namespace dpfbo::accountant

#endif  // DPFBO_ACCOUNTANT_HPP
