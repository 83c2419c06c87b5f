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

#ifndef DPFBO_OBJECTIVES_HPP
#define DPFBO_OBJECTIVES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "dpfbo/domain.hpp"
#include "dpfbo/kernel.hpp"
#include "dpfbo/rng.hpp"
#include "dpfbo/surrogate.hpp"
#include "json.hpp"

namespace dpfbo {

/// Family of per-agent objective functions tabulated on the grid. Immutable
/// after generation; the suite holds no RNG state, so it can be shared
/// across agents and threads.
struct ObjectiveSuite {
  Eigen::VectorXd base;       // normalized base function (may be empty)
  Eigen::MatrixXd per_agent;  // N x |X|
  double perturbation = 0.0;  // d, synthetic mode
  std::uint64_t seed = 0;

  int num_agents() const { return static_cast<int>(per_agent.rows()); }
  int grid_size() const { return static_cast<int>(per_agent.cols()); }

  double value(int agent, int id) const {
    if (agent < 0 || agent >= num_agents())
      throw std::out_of_range("objective: agent index out of range");
    if (id < 0 || id >= grid_size())
      throw std::out_of_range("objective: grid id out of range");
    return per_agent(agent, id);
  }

  /// Best value and argmax grid id of agent n's own objective.
  std::pair<double, int> optimum(int agent) const {
    int best = 0;
    for (int id = 1; id < grid_size(); ++id)
      if (per_agent(agent, id) > per_agent(agent, best)) best = id;
    return {per_agent(agent, best), best};
  }
};

namespace detail {
// One GP sample on the grid (SE kernel), min-max normalized to [0, 1].
inline Eigen::VectorXd normalized_gp_sample(const Eigen::MatrixXd& grid,
                                            double lengthscale,
                                            rng::Engine& eng) {
  KernelSpec k;
  k.lengthscale = lengthscale;
  k.signal_variance = 1.0;
  Eigen::MatrixXd K = gram(k, grid);
  K.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("objective: grid covariance factorization failed");
  Eigen::VectorXd xi(grid.rows());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng::normal(eng);
  Eigen::VectorXd f = Eigen::MatrixXd(llt.matrixL()) * xi;
  const double lo = f.minCoeff(), hi = f.maxCoeff();
  // spread at the jitter scale means the grid points are (near-)identical
  if (!(hi - lo > 1e-4))
    throw std::runtime_error(
        "objective: degenerate sample (all grid values identical)");
  return (f.array() - lo) / (hi - lo);
}
}  // namespace detail

/// Synthetic suite: one normalized GP sample, then every agent's value at
/// every grid point is independently shifted by +d or -d with equal
/// probability. Values are left unclipped (range [-d, 1+d]).
inline ObjectiveSuite gen_synthetic(const Domain& domain, int num_agents,
                                    double lengthscale = 0.03, double d = 0.02,
                                    std::uint64_t seed = 0) {
  if (domain.size() < 1)
    throw std::invalid_argument("objective: empty grid");
  if (num_agents < 1)
    throw std::invalid_argument("objective: need at least one agent");
  ObjectiveSuite suite;
  suite.perturbation = d;
  suite.seed = seed;
  auto eng = rng::derive(seed, rng::Stream::kObjective);
  suite.base = detail::normalized_gp_sample(domain.grid, lengthscale, eng);
  suite.per_agent.resize(num_agents, domain.size());
  for (int n = 0; n < num_agents; ++n)
    for (int id = 0; id < domain.size(); ++id)
      suite.per_agent(n, id) =
          suite.base[id] + (rng::u01(eng) < 0.5 ? d : -d);
  return suite;
}

/// Heterogeneous suite: f^n = alpha * f^n_indep + (1-alpha) * f_base with
/// independent normalized GP samples; alpha = 0 collapses to a shared
/// objective and alpha = 1 to fully independent ones.
inline ObjectiveSuite gen_heterogeneous(const Domain& domain, int num_agents,
                                        double alpha, double lengthscale = 0.03,
                                        std::uint64_t seed = 0) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("objective: alpha must be in [0, 1]");
  if (domain.size() < 1)
    throw std::invalid_argument("objective: empty grid");
  if (num_agents < 1)
    throw std::invalid_argument("objective: need at least one agent");
  ObjectiveSuite suite;
  suite.seed = seed;
  auto eng = rng::derive(seed, rng::Stream::kObjective);
  suite.base = detail::normalized_gp_sample(domain.grid, lengthscale, eng);
  suite.per_agent.resize(num_agents, domain.size());
  for (int n = 0; n < num_agents; ++n) {
    const Eigen::VectorXd indep =
        detail::normalized_gp_sample(domain.grid, lengthscale, eng);
    suite.per_agent.row(n) =
        (alpha * indep + (1.0 - alpha) * suite.base).transpose();
  }
  return suite;
}

struct Observation {
  double y = 0.0;        // noisy value shown to the surrogate
  double f_true = 0.0;   // noiseless value, used only for regret bookkeeping
};

inline Observation evaluate(const ObjectiveSuite& suite, int agent, int id,
                            double noise_std, rng::Engine& eng) {
  Observation obs;
  obs.f_true = suite.value(agent, id);
  obs.y = obs.f_true + (noise_std > 0.0 ? noise_std * rng::normal(eng) : 0.0);
  return obs;
}

/// Suite file format: one JSON header line, then one whitespace-separated
/// row of N values per grid id (optionally preceded by a base-function row).
inline void save_table(const ObjectiveSuite& suite, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("objective: cannot write " + path);
  nlohmann::json header{{"grid_size", suite.grid_size()},
                        {"n_agents", suite.num_agents()},
                        {"seed", suite.seed},
                        {"d", suite.perturbation},
                        {"has_base", suite.base.size() > 0}};
  out << header.dump() << "\n";
  out.precision(17);
  if (suite.base.size() > 0) {
    for (int id = 0; id < suite.grid_size(); ++id)
      out << (id ? " " : "") << suite.base[id];
    out << "\n";
  }
  for (int id = 0; id < suite.grid_size(); ++id) {
    for (int n = 0; n < suite.num_agents(); ++n)
      out << (n ? " " : "") << suite.per_agent(n, id);
    out << "\n";
  }
  if (!out) throw std::runtime_error("objective: write failed for " + path);
}

inline ObjectiveSuite load_table_objective(const std::string& path,
                                           std::ostream& warnings = std::cerr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("objective: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("objective: missing header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("objective: malformed header in " + path + ": " +
                             e.what());
  }
  ObjectiveSuite suite;
  const int grid_size = header.at("grid_size").get<int>();
  const int num_agents = header.at("n_agents").get<int>();
  suite.seed = header.value("seed", std::uint64_t{0});
  suite.perturbation = header.value("d", 0.0);
  const bool has_base = header.value("has_base", false);
  if (grid_size < 1 || num_agents < 1)
    throw std::runtime_error("objective: invalid header sizes in " + path);

  if (has_base) {
    if (!std::getline(in, line))
      throw std::runtime_error("objective: missing base row in " + path);
    std::istringstream ss(line);
    suite.base.resize(grid_size);
    for (int id = 0; id < grid_size; ++id)
      if (!(ss >> suite.base[id]))
        throw std::runtime_error("objective: malformed base row in " + path);
  }

  suite.per_agent.resize(num_agents, grid_size);
  bool out_of_range = false;
  for (int id = 0; id < grid_size; ++id) {
    if (!std::getline(in, line))
      throw std::runtime_error("objective: missing row for grid id " +
                               std::to_string(id) + " in " + path);
    std::istringstream ss(line);
    for (int n = 0; n < num_agents; ++n) {
      if (!(ss >> suite.per_agent(n, id)))
        throw std::runtime_error("objective: malformed row for grid id " +
                                 std::to_string(id) + " in " + path);
      const double v = suite.per_agent(n, id);
      if (v < 0.0 || v > 1.0) out_of_range = true;
    }
  }
  if (out_of_range)
    warnings << "objective: " << path
             << " contains values outside [0, 1]; loading as-is\n";
  return suite;
}

}  // namespace dpfbo

#endif  // DPFBO_OBJECTIVES_HPP
