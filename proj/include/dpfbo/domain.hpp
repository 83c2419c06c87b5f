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

#ifndef DPFBO_DOMAIN_HPP
#define DPFBO_DOMAIN_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpfbo/rng.hpp"
#include "json.hpp"

namespace dpfbo {

/// Discrete search domain: a finite grid of candidate points inside an
/// axis-aligned bounding box. Immutable after construction.
struct Domain {
  int dims = 0;
  std::vector<std::array<double, 2>> bounds;  // per-dim [lo, hi]
  Eigen::MatrixXd grid;                       // |X| x D, row id = point id

  int size() const { return static_cast<int>(grid.rows()); }
  Eigen::VectorXd point(int id) const { return grid.row(id).transpose(); }
};

inline void validate_bounds(const std::vector<std::array<double, 2>>& bounds) {
  if (bounds.empty()) throw std::invalid_argument("domain: empty bounds");
  for (const auto& b : bounds) {
    if (!(b[0] < b[1]))
      throw std::invalid_argument("domain: inverted or empty bounds [" +
                                  std::to_string(b[0]) + ", " +
                                  std::to_string(b[1]) + "]");
  }
}

/// Equally spaced grid including both endpoints (tensor product for D > 1,
/// points counted per dimension; last dimension varies fastest so the lower
/// corner always has id 0).
inline Domain build_grid(int dims, std::vector<std::array<double, 2>> bounds,
                         int points_per_dim) {
  if (dims < 1) throw std::invalid_argument("domain: dims must be >= 1");
  if (static_cast<int>(bounds.size()) != dims)
    throw std::invalid_argument("domain: bounds size must equal dims");
  validate_bounds(bounds);
  if (points_per_dim < 1)
    throw std::invalid_argument("domain: need at least one grid point");

  Domain d;
  d.dims = dims;
  d.bounds = std::move(bounds);

  std::int64_t total = 1;
  for (int k = 0; k < dims; ++k) {
    total *= points_per_dim;
    if (total > (1 << 24))
      throw std::invalid_argument("domain: tensor grid too large");
  }
  d.grid.resize(total, dims);
  for (std::int64_t id = 0; id < total; ++id) {
    std::int64_t rem = id;
    for (int k = dims - 1; k >= 0; --k) {
      const std::int64_t cell = rem % points_per_dim;
      rem /= points_per_dim;
      const auto& b = d.bounds[k];
      d.grid(id, k) =
          points_per_dim == 1
              ? b[0]
              : b[0] + (b[1] - b[0]) * static_cast<double>(cell) /
                           static_cast<double>(points_per_dim - 1);
    }
  }
  return d;
}

/// 1-D convenience overload: `points_total` equally spaced points on [lo,hi].
inline Domain build_grid(int points_total, double lo = 0.0, double hi = 1.0) {
  return build_grid(1, {{{lo, hi}}}, points_total);
}

/// Domain over an explicit point list supplied by the caller.
inline Domain make_domain(std::vector<std::array<double, 2>> bounds,
                          Eigen::MatrixXd points) {
  validate_bounds(bounds);
  if (points.rows() < 1)
    throw std::invalid_argument("domain: need at least one grid point");
  if (points.cols() != static_cast<Eigen::Index>(bounds.size()))
    throw std::invalid_argument("domain: point dimension mismatch");
  Domain d;
  d.dims = static_cast<int>(bounds.size());
  for (int i = 0; i < points.rows(); ++i)
    for (int k = 0; k < d.dims; ++k)
      if (points(i, k) < bounds[k][0] || points(i, k) > bounds[k][1])
        throw std::invalid_argument("domain: point " + std::to_string(i) +
                                    " outside bounds");
  d.bounds = std::move(bounds);
  d.grid = std::move(points);
  return d;
}

/// Equal-volume hyper-rectangular sub-regions. Intervals are half-open on
/// the low side of every split; the global upper face is closed, so a point
/// exactly on a split plane belongs to the upper box.
struct Partition {
  int num_regions = 1;
  std::vector<std::array<double, 2>> box;           // bounding box, per dim
  std::vector<std::vector<std::array<double, 2>>> regions;  // [P][D] intervals
  std::vector<int> cells_per_dim;                   // region lattice shape
  std::vector<int> cell_to_region;                  // flat lattice -> region
  std::vector<int> region_of_point;                 // grid id -> region

  int region_of(const Eigen::VectorXd& x) const {
    const int dims = static_cast<int>(box.size());
    std::int64_t flat = 0;
    for (int k = 0; k < dims; ++k) {
      if (x[k] < box[k][0] || x[k] > box[k][1])
        throw std::invalid_argument("region_of: point outside bounding box");
      const int cells = cells_per_dim[k];
      const double w = (box[k][1] - box[k][0]) / cells;
      int cell = static_cast<int>(std::floor((x[k] - box[k][0]) / w));
      cell = std::clamp(cell, 0, cells - 1);
      flat = flat * cells + cell;
    }
    return cell_to_region[flat];
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : regions) {
      nlohmann::json intervals = nlohmann::json::array();
      for (const auto& iv : r) intervals.push_back({iv[0], iv[1]});
      j.push_back(intervals);
    }
    return j;
  }
};

namespace detail {
inline bool is_power_of_two(int p) { return p >= 1 && (p & (p - 1)) == 0; }
}  // namespace detail

/// Splits the domain's bounding box into P equal-volume boxes by successive
/// axis-aligned halving, cycling dimensions in index order. For D = 1 any
/// P >= 1 is accepted (equal interval split); for D > 1, P must be a power
/// of two.
inline Partition partition(const Domain& domain, int num_regions) {
  if (num_regions < 1)
    throw std::invalid_argument("partition: P must be >= 1");
  if (domain.dims > 1 && !detail::is_power_of_two(num_regions))
    throw std::invalid_argument(
        "partition: P = " + std::to_string(num_regions) +
        " is not a power of two; only power-of-two region counts are "
        "supported for multi-dimensional domains");

  Partition part;
  part.num_regions = num_regions;
  part.box = domain.bounds;
  part.cells_per_dim.assign(domain.dims, 1);

  if (domain.dims == 1) {
    part.cells_per_dim[0] = num_regions;
    const double lo = domain.bounds[0][0], hi = domain.bounds[0][1];
    for (int i = 0; i < num_regions; ++i) {
      const double a = lo + (hi - lo) * i / num_regions;
      const double b = lo + (hi - lo) * (i + 1) / num_regions;
      part.regions.push_back({{{a, b}}});
      part.cell_to_region.push_back(i);
    }
  } else {
    // Successive halving: every split replaces each box, in list order, by
    // its lower and upper halves on the cycling dimension. This reproduces
    // the printed P=4 layouts exactly.
    struct Cell {
      std::vector<int> idx;  // per-dim cell index
    };
    std::vector<Cell> cells{Cell{std::vector<int>(domain.dims, 0)}};
    int splits = 0;
    for (int p = num_regions; p > 1; p >>= 1) ++splits;
    for (int s = 0; s < splits; ++s) {
      const int dim = s % domain.dims;
      part.cells_per_dim[dim] *= 2;
      std::vector<Cell> next;
      next.reserve(cells.size() * 2);
      for (const auto& c : cells) {
        Cell lo_child = c, hi_child = c;
        lo_child.idx[dim] = c.idx[dim] * 2;
        hi_child.idx[dim] = c.idx[dim] * 2 + 1;
        next.push_back(std::move(lo_child));
        next.push_back(std::move(hi_child));
      }
      cells = std::move(next);
    }
    std::int64_t lattice = 1;
    for (int c : part.cells_per_dim) lattice *= c;
    part.cell_to_region.assign(static_cast<std::size_t>(lattice), -1);
    for (std::size_t r = 0; r < cells.size(); ++r) {
      std::vector<std::array<double, 2>> intervals(domain.dims);
      std::int64_t flat = 0;
      for (int k = 0; k < domain.dims; ++k) {
        const int cellk = cells[r].idx[k];
        const int nk = part.cells_per_dim[k];
        const double lo = domain.bounds[k][0], hi = domain.bounds[k][1];
        intervals[k] = {lo + (hi - lo) * cellk / nk,
                        lo + (hi - lo) * (cellk + 1) / nk};
        flat = flat * nk + cellk;
      }
      part.regions.push_back(std::move(intervals));
      part.cell_to_region[flat] = static_cast<int>(r);
    }
  }

  part.region_of_point.resize(domain.size());
  for (int id = 0; id < domain.size(); ++id)
    part.region_of_point[id] = part.region_of(domain.point(id));
  return part;
}

/// Agent-to-sub-region assignment: a random permutation dealt round-robin,
/// so per-region counts differ by at most one.
struct Assignment {
  std::vector<int> region_of_agent;
  std::vector<int> counts;

  int num_agents() const { return static_cast<int>(region_of_agent.size()); }
  int num_regions() const { return static_cast<int>(counts.size()); }
};

inline Assignment assign_agents(int num_agents, int num_regions,
                                rng::Engine& eng) {
  if (num_agents < 1) throw std::invalid_argument("assign_agents: N >= 1");
  if (num_regions < 1) throw std::invalid_argument("assign_agents: P >= 1");
  std::vector<int> perm(num_agents);
  for (int i = 0; i < num_agents; ++i) perm[i] = i;
  rng::shuffle(perm, eng);
  Assignment a;
  a.region_of_agent.assign(num_agents, 0);
  a.counts.assign(num_regions, 0);
  for (int j = 0; j < num_agents; ++j) {
    const int region = j % num_regions;
    a.region_of_agent[perm[j]] = region;
    ++a.counts[region];
  }
  return a;
}

}  // namespace dpfbo

#endif  // DPFBO_DOMAIN_HPP
