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

#ifndef DPFBO_MECHANISM_HPP
#define DPFBO_MECHANISM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpfbo/rng.hpp"
#include "json.hpp"

namespace dpfbo {

/// Server-side subsampled Gaussian mechanism parameters.
struct DpParams {
  double q = 1.0;  // Bernoulli subsampling probability
  double z = 0.0;  // noise ratio (std as a multiple of the sensitivity)
  double clip_threshold = std::numeric_limits<double>::infinity();  // S
  int num_regions = 1;                                              // P

  void validate() const {
    if (!(q > 0.0) || q > 1.0)
      throw std::invalid_argument("dp: q must be in (0, 1]");
    if (z < 0.0) throw std::invalid_argument("dp: z must be nonnegative");
    if (!(clip_threshold > 0.0))
      throw std::invalid_argument("dp: clipping threshold must be positive");
    if (num_regions < 1) throw std::invalid_argument("dp: P must be >= 1");
    if (z > 0.0 && std::isinf(clip_threshold))
      throw std::invalid_argument(
          "dp: unbounded clipping threshold with z > 0 gives unbounded "
          "noise");
  }
};

/// Per-round server output: one M-vector per sub-region.
struct Broadcast {
  int round = 0;
  std::vector<Eigen::VectorXd> per_region;

  int num_regions() const { return static_cast<int>(per_region.size()); }

  /// Logging form: (round, P, M, row-major flat array).
  nlohmann::json to_json() const {
    const int m =
        per_region.empty() ? 0 : static_cast<int>(per_region.front().size());
    std::vector<double> flat;
    flat.reserve(per_region.size() * m);
    for (const auto& v : per_region)
      flat.insert(flat.end(), v.data(), v.data() + v.size());
    return {{"round", round},
            {"num_regions", num_regions()},
            {"num_features", m},
            {"data", flat}};
  }
};

/// Clip-set instrumentation: which received vectors exceeded S/sqrt(P).
struct ClipStats {
  std::vector<int> clipped_agents;
  int received = 0;
  double fraction = 0.0;
};

/// Every agent enters the subset independently with probability q; the
/// result may be empty and is never re-drawn.
inline std::vector<int> subsample(int num_agents, double q, rng::Engine& eng) {
  if (!(q > 0.0) || q > 1.0)
    throw std::invalid_argument("subsample: q must be in (0, 1]");
  std::vector<int> selected;
  for (int n = 0; n < num_agents; ++n)
    if (q >= 1.0 || rng::u01(eng) < q) selected.push_back(n);
  return selected;
}

/// L2 clipping to norm S/sqrt(P): w / max(1, ||w|| / (S/sqrt(P))).
inline Eigen::VectorXd clip(const Eigen::VectorXd& w, double clip_threshold,
                            int num_regions) {
  if (std::isinf(clip_threshold)) return w;
  const double bound = clip_threshold / std::sqrt(num_regions);
  const double norm = w.norm();
  if (norm <= bound) return w;
  return w * (bound / norm);
}

/// Noise std of the mechanism: z * phi_max * S / q.
inline double noise_std(const DpParams& params, double phi_max) {
  if (!(params.q > 0.0)) throw std::invalid_argument("noise_std: q must be > 0");
  if (params.z == 0.0) return 0.0;
  return params.z * phi_max * params.clip_threshold / params.q;
}

/// One mechanism invocation over the received vectors (rows of `received`,
/// one per agent): for each region i,
///   omega^(i) = (1/q) sum_{n in selected} w^(i)_n clip(omega_n) + eta_i,
/// with eta_i elementwise N(0, (z phi_max S / q)^2), drawn from a separate
/// stream per region so results do not depend on evaluation order. Division
/// by q is the unbiased-estimator form and applies even to an empty subset.
/// Clip statistics are computed over all received vectors.
inline std::pair<Broadcast, ClipStats> aggregate(
    const Eigen::MatrixXd& received, const std::vector<int>& selected,
    const Eigen::MatrixXd& weights, const DpParams& params, rng::Engine& eng,
    int round = 0) {
  params.validate();
  const int num_agents = static_cast<int>(received.rows());
  const int dim = static_cast<int>(received.cols());
  if (weights.rows() != params.num_regions || weights.cols() != num_agents)
    throw std::invalid_argument("aggregate: weight matrix shape mismatch");
  for (int n : selected)
    if (n < 0 || n >= num_agents)
      throw std::invalid_argument("aggregate: selected agent out of range");

  const double phi_max = weights.maxCoeff();
  const double sigma = noise_std(params, phi_max);

  ClipStats stats;
  stats.received = num_agents;
  const double bound = params.clip_threshold / std::sqrt(params.num_regions);
  for (int n = 0; n < num_agents; ++n)
    if (received.row(n).norm() > bound) stats.clipped_agents.push_back(n);
  stats.fraction = num_agents == 0
                       ? 0.0
                       : static_cast<double>(stats.clipped_agents.size()) /
                             num_agents;

  // Per-region noise streams, derived up front so region loops could run in
  // any order.
  std::vector<rng::Engine> noise_streams;
  noise_streams.reserve(params.num_regions);
  for (int i = 0; i < params.num_regions; ++i)
    noise_streams.push_back(rng::Engine(eng()));

  Broadcast out;
  out.round = round;
  out.per_region.reserve(params.num_regions);
  std::vector<Eigen::VectorXd> clipped;
  clipped.reserve(selected.size());
  for (int n : selected)
    clipped.push_back(
        clip(received.row(n).transpose(), params.clip_threshold,
             params.num_regions));
  for (int i = 0; i < params.num_regions; ++i) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    for (std::size_t s = 0; s < selected.size(); ++s)
      acc += (weights(i, selected[s]) / params.q) * clipped[s];
    if (sigma > 0.0)
      for (int c = 0; c < dim; ++c)
        acc[c] += sigma * rng::normal(noise_streams[i]);
    out.per_region.push_back(std::move(acc));
  }
  return {std::move(out), std::move(stats)};
}

}  // namespace dpfbo

#endif  // DPFBO_MECHANISM_HPP
