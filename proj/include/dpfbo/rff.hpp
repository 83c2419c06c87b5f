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

#ifndef DPFBO_RFF_HPP
#define DPFBO_RFF_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "dpfbo/kernel.hpp"
#include "dpfbo/rng.hpp"
#include "json.hpp"

namespace dpfbo {

/// Shared random Fourier feature basis for the SE kernel. All agents use one
/// map, so (kernel, M, seed, paired) fully determine it and serializing those
/// four values suffices to reconstruct it.
///
/// The default paired construction stacks cos and sin per frequency,
///   phi(x) = sigma0 * sqrt(2/M) * [cos(Wx); sin(Wx)],
/// which makes ||phi(x)||^2 = sigma0^2 hold exactly for every x. The
/// classic cosine-plus-phase variant is kept behind `paired = false` for
/// comparison; it only satisfies the norm identity in expectation.
struct RffMap {
  KernelSpec kernel;
  int num_features = 0;        // M, even
  std::uint64_t seed = 0;
  bool paired = true;
  Eigen::MatrixXd frequencies;  // paired: (M/2) x D; cosine variant: M x D
  Eigen::VectorXd phases;       // cosine variant only

  Eigen::VectorXd features(const Eigen::VectorXd& x) const {
    const double amp =
        std::sqrt(2.0 * kernel.signal_variance / num_features);
    Eigen::VectorXd phi(num_features);
    if (paired) {
      const Eigen::VectorXd proj = frequencies * x;
      const int half = num_features / 2;
      phi.head(half) = proj.array().cos() * amp;
      phi.tail(half) = proj.array().sin() * amp;
    } else {
      const Eigen::VectorXd proj = frequencies * x + phases;
      phi = proj.array().cos() * amp;
    }
    return phi;
  }

  /// Feature matrix with one row per row of X.
  Eigen::MatrixXd features_matrix(const Eigen::MatrixXd& X) const {
    const double amp =
        std::sqrt(2.0 * kernel.signal_variance / num_features);
    Eigen::MatrixXd Phi(X.rows(), num_features);
    if (paired) {
      const Eigen::MatrixXd proj = X * frequencies.transpose();
      const int half = num_features / 2;
      Phi.leftCols(half) = proj.array().cos() * amp;
      Phi.rightCols(half) = proj.array().sin() * amp;
    } else {
      Eigen::MatrixXd proj = X * frequencies.transpose();
      proj.rowwise() += phases.transpose();
      Phi = proj.array().cos() * amp;
    }
    return Phi;
  }
};

/// The map is fully determined by (kernel, dims, M, seed, paired), so that
/// tuple is its serialized form.
inline nlohmann::json rff_to_json(const RffMap& map) {
  return {{"lengthscale", map.kernel.lengthscale},
          {"signal_variance", map.kernel.signal_variance},
          {"dims", map.frequencies.cols()},
          {"num_features", map.num_features},
          {"seed", map.seed},
          {"paired", map.paired}};
}

inline RffMap sample_rff(const KernelSpec& kernel, int dims, int num_features,
                         std::uint64_t seed, bool paired = true);

inline RffMap rff_from_json(const nlohmann::json& j) {
  KernelSpec kernel;
  kernel.lengthscale = j.at("lengthscale").get<double>();
  kernel.signal_variance = j.at("signal_variance").get<double>();
  return sample_rff(kernel, j.at("dims").get<int>(),
                    j.at("num_features").get<int>(),
                    j.at("seed").get<std::uint64_t>(),
                    j.value("paired", true));
}

/// Draws the shared feature map: M/2 frequency rows i.i.d. from the SE
/// spectral density (zero-mean Gaussian, per-dim std 1/lengthscale).
inline RffMap sample_rff(const KernelSpec& kernel, int dims, int num_features,
                         std::uint64_t seed, bool paired) {
  kernel.validate();
  if (num_features < 2 || num_features % 2 != 0)
    throw std::invalid_argument("rff: feature count must be even and >= 2");
  RffMap map;
  map.kernel = kernel;
  map.num_features = num_features;
  map.seed = seed;
  map.paired = paired;
  rng::Engine eng(seed);
  const int rows = paired ? num_features / 2 : num_features;
  map.frequencies.resize(rows, dims);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < dims; ++k)
      map.frequencies(i, k) = rng::normal(eng) / kernel.lengthscale;
  if (!paired) {
    map.phases.resize(num_features);
    for (int i = 0; i < num_features; ++i)
      map.phases[i] = 2.0 * std::numbers::pi * rng::u01(eng);
  }
  return map;
}

}  // namespace dpfbo

#endif  // DPFBO_RFF_HPP
