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

#ifndef DPFBO_KERNEL_HPP
#define DPFBO_KERNEL_HPP

#include <Eigen/Dense>
#include <stdexcept>

namespace dpfbo {

/// Isotropic squared-exponential kernel,
/// k(x,x') = signal_variance * exp(-||x-x'||^2 / (2 lengthscale^2)).
struct KernelSpec {
  double lengthscale = 0.2;
  double signal_variance = 1.0;  // sigma0^2, bounded by 1
  double obs_noise = 0.01;       // observation noise variance sigma^2

  void validate() const {
    if (!(lengthscale > 0.0))
      throw std::invalid_argument("kernel: lengthscale must be positive");
    if (!(signal_variance > 0.0) || signal_variance > 1.0)
      throw std::invalid_argument(
          "kernel: signal variance must be in (0, 1]");
    if (obs_noise < 0.0)
      throw std::invalid_argument("kernel: negative observation noise");
  }
};

inline double se_kernel(const KernelSpec& k, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b) {
  return k.signal_variance *
         std::exp(-(a - b).squaredNorm() / (2.0 * k.lengthscale * k.lengthscale));
}

/// Gram matrix over the rows of X.
inline Eigen::MatrixXd gram(const KernelSpec& k, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = k.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = k.signal_variance *
                       std::exp(-(X.row(i) - X.row(j)).squaredNorm() /
                                (2.0 * k.lengthscale * k.lengthscale));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

/// Cross-covariance between the rows of A and the rows of B.
inline Eigen::MatrixXd cross_gram(const KernelSpec& k, const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      K(i, j) = k.signal_variance *
                std::exp(-(A.row(i) - B.row(j)).squaredNorm() /
                         (2.0 * k.lengthscale * k.lengthscale));
  return K;
}

}  // namespace dpfbo

#endif  // DPFBO_KERNEL_HPP
