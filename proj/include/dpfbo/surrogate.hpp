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

#ifndef DPFBO_SURROGATE_HPP
#define DPFBO_SURROGATE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpfbo/kernel.hpp"
#include "dpfbo/rff.hpp"
#include "dpfbo/rng.hpp"

namespace dpfbo {

inline constexpr double kGramJitterScale = 1e-10;

/// Append-only query history (x_t, y_t).
struct History {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<double> outputs;

  int size() const { return static_cast<int>(outputs.size()); }

  void append(Eigen::VectorXd x, double y) {
    inputs.push_back(std::move(x));
    outputs.push_back(y);
  }

  Eigen::MatrixXd input_matrix() const {
    if (inputs.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd X(inputs.size(), inputs.front().size());
    for (std::size_t i = 0; i < inputs.size(); ++i)
      X.row(i) = inputs[i].transpose();
    return X;
  }

  Eigen::VectorXd output_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(outputs.data(), outputs.size());
  }
};

/// Exact GP posterior:
///   mu_t(x)      = k_t(x)^T (K_t + lambda I)^{-1} y_t
///   sigma_t^2(x,x') = k(x,x') - k_t(x)^T (K_t + lambda I)^{-1} k_t(x').
/// Stored as the Cholesky factor of the regularized Gram matrix.
class GpPosterior {
 public:
  static GpPosterior fit(const History& history, const KernelSpec& kernel,
                         double lambda) {
    kernel.validate();
    if (!(lambda > 0.0))
      throw std::invalid_argument("gp: lambda must be positive");
    GpPosterior post;
    post.kernel_ = kernel;
    post.lambda_ = lambda;
    post.train_x_ = history.input_matrix();
    const Eigen::Index n = post.train_x_.rows();
    if (n > 0) {
      Eigen::MatrixXd K = gram(kernel, post.train_x_);
      K.diagonal().array() +=
          lambda + kGramJitterScale * kernel.signal_variance;
      post.chol_.compute(K);
      if (post.chol_.info() != Eigen::Success)
        throw std::runtime_error("gp: Cholesky factorization failed");
      post.alpha_ = post.chol_.solve(history.output_vector());
    }
    return post;
  }

  double mean(const Eigen::VectorXd& x) const {
    if (train_x_.rows() == 0) return 0.0;
    return kvec(x).dot(alpha_);
  }

  double covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& xp) const {
    const double prior = se_kernel(kernel_, x, xp);
    if (train_x_.rows() == 0) return prior;
    return prior - kvec(x).dot(chol_.solve(kvec(xp)));
  }

  double variance(const Eigen::VectorXd& x) const { return covariance(x, x); }

  Eigen::VectorXd mean_on(const Eigen::MatrixXd& X) const {
    if (train_x_.rows() == 0) return Eigen::VectorXd::Zero(X.rows());
    return cross_gram(kernel_, X, train_x_) * alpha_;
  }

  Eigen::MatrixXd covariance_on(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd prior = gram(kernel_, X);
    if (train_x_.rows() == 0) return prior;
    const Eigen::MatrixXd Kxt = cross_gram(kernel_, X, train_x_);
    return prior - Kxt * chol_.solve(Kxt.transpose());
  }

  double lambda() const { return lambda_; }
  const KernelSpec& kernel() const { return kernel_; }

 private:
  Eigen::VectorXd kvec(const Eigen::VectorXd& x) const {
    Eigen::VectorXd k(train_x_.rows());
    for (Eigen::Index i = 0; i < train_x_.rows(); ++i)
      k[i] = se_kernel(kernel_, x, train_x_.row(i).transpose());
    return k;
  }

  KernelSpec kernel_;
  double lambda_ = 1.0;
  Eigen::MatrixXd train_x_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

namespace detail {
// Standard rank-one Cholesky update: L L^T + v v^T = L' L'^T in place.
inline void cholesky_rank_one_update(Eigen::MatrixXd& L, Eigen::VectorXd v) {
  const Eigen::Index n = L.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = std::hypot(L(k, k), v[k]);
    const double c = r / L(k, k);
    const double s = v[k] / L(k, k);
    L(k, k) = r;
    if (k + 1 < n) {
      L.col(k).tail(n - k - 1) =
          (L.col(k).tail(n - k - 1) + s * v.tail(n - k - 1)) / c;
      v.tail(n - k - 1) = c * v.tail(n - k - 1) - s * L.col(k).tail(n - k - 1);
    }
  }
}
}  // namespace detail

/// Linear-model posterior over feature weights:
///   Sigma_t = Phi_t^T Phi_t + lambda I  (kept as its lower Cholesky factor)
///   nu_t    = Sigma_t^{-1} Phi_t^T y_t.
/// Appends run as rank-one updates; `fit` rebuilds from scratch and both
/// agree to high precision.
class FeaturePosterior {
 public:
  static FeaturePosterior prior(int num_features, double lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("feature posterior: lambda must be positive");
    FeaturePosterior post;
    post.lambda_ = lambda;
    post.chol_lower_ = Eigen::MatrixXd::Identity(num_features, num_features) *
                       std::sqrt(lambda);
    post.xty_ = Eigen::VectorXd::Zero(num_features);
    post.nu_ = Eigen::VectorXd::Zero(num_features);
    return post;
  }

  static FeaturePosterior fit(const History& history, const RffMap& rff,
                              double lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("feature posterior: lambda must be positive");
    FeaturePosterior post;
    post.lambda_ = lambda;
    const int m = rff.num_features;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(m, m) * lambda;
    post.xty_ = Eigen::VectorXd::Zero(m);
    if (history.size() > 0) {
      const Eigen::MatrixXd Phi = rff.features_matrix(history.input_matrix());
      sigma += Phi.transpose() * Phi;
      post.xty_ = Phi.transpose() * history.output_vector();
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("feature posterior: Cholesky failed");
    post.chol_lower_ = llt.matrixL();
    post.refresh_nu();
    return post;
  }

  /// Rank-one update with one new observation phi(x), y.
  void append(const Eigen::VectorXd& phi, double y) {
    detail::cholesky_rank_one_update(chol_lower_, phi);
    xty_ += phi * y;
    refresh_nu();
  }

  /// omega ~ N(nu_t, scale^2 * lambda * Sigma_t^{-1}); scale 0 returns nu_t.
  Eigen::VectorXd sample_omega(rng::Engine& eng, double scale = 1.0) const {
    if (scale == 0.0) return nu_;
    Eigen::VectorXd xi(nu_.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng::normal(eng);
    return nu_ + scale * std::sqrt(lambda_) *
                     chol_lower_.transpose()
                         .triangularView<Eigen::Upper>()
                         .solve(xi);
  }

  double mean_at(const Eigen::VectorXd& phi) const { return phi.dot(nu_); }

  /// Posterior variance lambda * phi^T Sigma^{-1} phi.
  double variance_at(const Eigen::VectorXd& phi) const {
    const Eigen::VectorXd half =
        chol_lower_.triangularView<Eigen::Lower>().solve(phi);
    return lambda_ * half.squaredNorm();
  }

  const Eigen::VectorXd& nu() const { return nu_; }
  const Eigen::MatrixXd& cholesky_lower() const { return chol_lower_; }
  double lambda() const { return lambda_; }
  int num_features() const { return static_cast<int>(nu_.size()); }

 private:
  void refresh_nu() {
    nu_ = chol_lower_.triangularView<Eigen::Lower>().solve(xty_);
    chol_lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(nu_);
  }

  double lambda_ = 1.0;
  Eigen::MatrixXd chol_lower_;
  Eigen::VectorXd xty_;
  Eigen::VectorXd nu_;
};

/// Exploration multiplier beta_t.
struct BetaSchedule {
  enum class Mode { kConstant, kTheory };
  Mode mode = Mode::kTheory;
  double constant = 2.0;
  double rkhs_bound = 1.0;  // B
  double obs_noise_std = 0.1;
  double delta = 0.1;
};

/// Theory mode evaluates B + sigma * sqrt(2 (gamma_{t-1} + 1 + log(4/delta)))
/// with the SE-kernel information-gain proxy gamma_s = (log(s+1))^{D+1}.
inline double beta_value(const BetaSchedule& sched, int t, int dims) {
  if (t < 1) throw std::invalid_argument("beta: t must be >= 1");
  if (sched.mode == BetaSchedule::Mode::kConstant) return sched.constant;
  const double gamma =
      std::pow(std::log(static_cast<double>(t)), dims + 1);
  return sched.rkhs_bound +
         sched.obs_noise_std *
             std::sqrt(2.0 * (gamma + 1.0 + std::log(4.0 / sched.delta)));
}

enum class TsMode { kRff, kExact };

/// Draws one Thompson sample of the objective on the grid.
///
/// rff mode follows the weight-space view: omega' ~ N(nu, beta^2 lambda
/// Sigma^{-1}) and f = Phi_grid omega'. exact mode draws the joint Gaussian
/// GP(mu_t, beta^2 sigma_t^2) over the grid through a dense Cholesky and is
/// limited to small grids.
inline Eigen::VectorXd sample_ts_function(const FeaturePosterior& posterior,
                                          double beta,
                                          const Eigen::MatrixXd& grid_features,
                                          rng::Engine& eng) {
  if (!(beta > 0.0)) throw std::invalid_argument("ts: beta must be positive");
  return grid_features * posterior.sample_omega(eng, beta);
}

inline Eigen::VectorXd sample_ts_function_exact(const GpPosterior& posterior,
                                                double beta,
                                                const Eigen::MatrixXd& grid,
                                                rng::Engine& eng,
                                                int grid_cap = 2000) {
  if (!(beta > 0.0)) throw std::invalid_argument("ts: beta must be positive");
  if (grid.rows() > grid_cap)
    throw std::invalid_argument(
        "ts: exact sampling requested on a grid larger than the configured "
        "cap");
  Eigen::MatrixXd cov = posterior.covariance_on(grid);
  cov.diagonal().array() +=
      kGramJitterScale * posterior.kernel().signal_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ts: grid covariance factorization failed");
  Eigen::VectorXd xi(grid.rows());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng::normal(eng);
  return posterior.mean_on(grid) + beta * (Eigen::MatrixXd(llt.matrixL()) * xi);
}

/// Deterministic argmax with lowest-index tie-break.
inline int argmax_lowest_id(const Eigen::VectorXd& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace dpfbo

#endif  // DPFBO_SURROGATE_HPP
