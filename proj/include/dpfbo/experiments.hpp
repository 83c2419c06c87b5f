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

#ifndef DPFBO_EXPERIMENTS_HPP
#define DPFBO_EXPERIMENTS_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpfbo/config.hpp"
#include "dpfbo/domain.hpp"
#include "dpfbo/objectives.hpp"
#include "dpfbo/protocol.hpp"
#include "dpfbo/rff.hpp"
#include "json.hpp"

namespace dpfbo {

struct SeedRun {
  std::uint64_t seed = 0;
  RunTrace trace;
};

/// Per-round aggregate of a metric over all (agent, seed) samples.
struct CurvePoint {
  int round = 0;
  double mean_simple = 0.0;
  double stderr_simple = 0.0;
  double mean_cum = 0.0;
  double stderr_cum = 0.0;
  double mean_clip_fraction = 0.0;
  double epsilon = 0.0;  // max over seeds (identical parameters -> identical)
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;
  std::vector<CurvePoint> curve;  // index = round
};

namespace detail {
inline ObjectiveSuite build_suite(const ExperimentConfig& c,
                                  const Domain& domain, std::uint64_t seed) {
  if (c.objective.kind == "synthetic")
    return gen_synthetic(domain, c.n_agents, c.objective.lengthscale,
                         c.objective.perturbation, seed);
  if (c.objective.kind == "heterogeneous")
    return gen_heterogeneous(domain, c.n_agents, c.objective.alpha,
                             c.objective.lengthscale, seed);
  ObjectiveSuite suite = load_table_objective(c.objective.path);
  if (suite.num_agents() != c.n_agents)
    throw ConfigError("table objective has " +
                      std::to_string(suite.num_agents()) +
                      " agents, config expects " + std::to_string(c.n_agents));
  return suite;
}

inline std::vector<CurvePoint> aggregate_curve(
    const std::vector<SeedRun>& runs) {
  if (runs.empty()) return {};
  const int horizon = runs.front().trace.horizon;
  const int num_agents = runs.front().trace.num_agents;
  std::vector<CurvePoint> curve(horizon + 1);
  const double count = static_cast<double>(runs.size()) * num_agents;
  for (int t = 0; t <= horizon; ++t) {
    CurvePoint& pt = curve[t];
    pt.round = t;
    double sum_s = 0.0, sum_s2 = 0.0, sum_c = 0.0, sum_c2 = 0.0;
    for (const auto& run : runs) {
      for (int n = 0; n < num_agents; ++n) {
        const TraceRow& row = run.trace.row(t, n);
        sum_s += row.simple_regret;
        sum_s2 += row.simple_regret * row.simple_regret;
        sum_c += row.cum_regret;
        sum_c2 += row.cum_regret * row.cum_regret;
      }
      pt.mean_clip_fraction += run.trace.rounds[t].clip_fraction;
      pt.epsilon = std::max(pt.epsilon, run.trace.rounds[t].epsilon);
    }
    pt.mean_simple = sum_s / count;
    pt.mean_cum = sum_c / count;
    const double var_s =
        std::max(0.0, sum_s2 / count - pt.mean_simple * pt.mean_simple);
    const double var_c =
        std::max(0.0, sum_c2 / count - pt.mean_cum * pt.mean_cum);
    pt.stderr_simple = std::sqrt(var_s / count);
    pt.stderr_cum = std::sqrt(var_c / count);
    pt.mean_clip_fraction /= static_cast<double>(runs.size());
  }
  return curve;
}

// Shortest-round-trip float formatting; emitted bytes depend only on the
// value, never on locale or stream state.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

/// Runs every seed replicate and aggregates regret curves.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_or_throw(config);
  ExperimentResult result;
  result.config = config;

  std::vector<std::array<double, 2>> bounds(config.domain.dims, {0.0, 1.0});
  const Domain domain =
      build_grid(config.domain.dims, bounds, config.domain.points_per_dim);
  const Partition part = partition(domain, config.n_regions);

  for (const std::uint64_t seed : config.seeds) {
    const ObjectiveSuite suite = detail::build_suite(config, domain, seed);
    const RffMap rff =
        sample_rff(config.kernel, domain.dims, config.n_features,
                   rng::derive(seed, rng::Stream::kRff)());
    SimulationInputs inputs;
    inputs.domain = &domain;
    inputs.partition = &part;
    inputs.suite = &suite;
    inputs.rff = &rff;
    inputs.weight_schedule = config.weight_schedule;
    inputs.dp = config.dp;
    inputs.protocol = config.protocol();
    inputs.obs_noise_std = std::sqrt(config.kernel.obs_noise);
    inputs.seed = seed;
    inputs.server_enabled = config.server_enabled();
    inputs.num_threads = config.resolved_threads();
    Simulation sim(inputs);
    result.runs.push_back({seed, sim.run()});
  }
  result.curve = detail::aggregate_curve(result.runs);
  return result;
}

/// Single-flag ablation overrides of module behaviors.
inline ExperimentConfig ablation_config(ExperimentConfig config,
                                        const std::string& kind) {
  if (kind == "uniform-weights") {
    config.weights_mode = "uniform";
    config.weight_schedule.mode = WeightSchedule::Mode::kUniform;
  } else if (kind == "full-domain-init") {
    config.full_domain_init = true;
  } else if (kind == "fixed-temperature") {
    config.weights_mode = "fixed-temperature";
    config.weight_schedule.mode = WeightSchedule::Mode::kFixedTemperature;
  } else {
    throw ConfigError("unknown ablation kind: " + kind);
  }
  return config;
}

inline ExperimentResult run_ablation(const ExperimentConfig& config,
                                     const std::string& kind) {
  return run_experiment(ablation_config(config, kind));
}

/// Full per-agent-per-round trace in the canonical CSV schema.
inline void emit_trace_csv(const ExperimentResult& result,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << "algo,seed,agent,round,branch,grid_id,f_value,y,simple_regret,"
         "cum_regret,clip_fraction,epsilon\n";
  const std::string algo = algo_name(result.config.algo);
  for (const auto& run : result.runs) {
    for (int t = 0; t <= run.trace.horizon; ++t) {
      const RoundRecord& rec = run.trace.rounds[t];
      for (int n = 0; n < run.trace.num_agents; ++n) {
        const TraceRow& row = run.trace.row(t, n);
        out << algo << ',' << run.seed << ',' << row.agent << ',' << row.round
            << ',' << branch_name(row.branch) << ',' << row.grid_id << ','
            << detail::format_double(row.f_value) << ','
            << detail::format_double(row.y) << ','
            << detail::format_double(row.simple_regret) << ','
            << detail::format_double(row.cum_regret) << ','
            << detail::format_double(rec.clip_fraction) << ','
            << detail::format_double(rec.epsilon) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("emit: write failed for " + path);
}

/// Aggregated curve (round, mean, stderr) for direct plotting.
inline void emit_curve_csv(const ExperimentResult& result,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << "round,mean_simple_regret,stderr_simple_regret,mean_cum_regret,"
         "stderr_cum_regret,mean_clip_fraction,epsilon\n";
  for (const auto& pt : result.curve)
    out << pt.round << ',' << detail::format_double(pt.mean_simple) << ','
        << detail::format_double(pt.stderr_simple) << ','
        << detail::format_double(pt.mean_cum) << ','
        << detail::format_double(pt.stderr_cum) << ','
        << detail::format_double(pt.mean_clip_fraction) << ','
        << detail::format_double(pt.epsilon) << '\n';
  if (!out) throw std::runtime_error("emit: write failed for " + path);
}

inline nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["config"] = to_json(result.config);
  const CurvePoint& last = result.curve.back();
  j["final"] = {{"round", last.round},
                {"mean_simple_regret", last.mean_simple},
                {"stderr_simple_regret", last.stderr_simple},
                {"mean_cum_regret", last.mean_cum},
                {"stderr_cum_regret", last.stderr_cum}};
  double clip_sum = 0.0;
  int clip_rounds = 0;
  double eps = 0.0;
  for (const auto& run : result.runs)
    for (const auto& rec : run.trace.rounds) {
      if (rec.aggregated) {
        clip_sum += rec.clip_fraction;
        ++clip_rounds;
      }
      eps = std::max(eps, rec.epsilon);
    }
  j["privacy"] = {{"epsilon", std::isinf(eps) ? nlohmann::json() :
                                                nlohmann::json(eps)},
                  {"delta", result.config.resolved_delta()},
                  {"tracked", result.config.server_enabled() &&
                                  result.config.dp.z > 0.0}};
  j["mean_clip_fraction"] =
      clip_rounds > 0 ? clip_sum / clip_rounds : 0.0;
  j["seeds"] = result.config.seeds;
  {
    std::vector<std::array<double, 2>> bounds(result.config.domain.dims,
                                              {0.0, 1.0});
    const Domain domain = build_grid(result.config.domain.dims, bounds,
                                     result.config.domain.points_per_dim);
    j["partition"] = partition(domain, result.config.n_regions).to_json();
  }
  return j;
}

inline void emit_summary_json(const ExperimentResult& result,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << summary_json(result).dump(2) << "\n";
  if (!out) throw std::runtime_error("emit: write failed for " + path);
}

/// Writes trace, curve and summary under config.output_dir.
inline void emit_all(const ExperimentResult& result, const std::string& stem) {
  std::filesystem::create_directories(result.config.output_dir);
  const std::string base = result.config.output_dir + "/" + stem;
  emit_trace_csv(result, base + "_trace.csv");
  emit_curve_csv(result, base + "_curve.csv");
  emit_summary_json(result, base + "_summary.json");
}

/// Cartesian sweep over a subset of {q, z, clip_threshold, n_regions}.
struct SweepPoint {
  ExperimentConfig config;
  ExperimentResult result;
};

inline std::vector<ExperimentConfig> expand_grid(
    const ExperimentConfig& base, const nlohmann::json& grid) {
  for (const auto& [key, _] : grid.items())
    if (key != "q" && key != "z" && key != "clip_threshold" &&
        key != "n_regions")
      throw ConfigError("sweep grid key must be one of q, z, clip_threshold, "
                        "n_regions; got " +
                        key);
  auto values = [&](const char* key, std::vector<double> fallback) {
    if (!grid.contains(key)) return fallback;
    return grid.at(key).get<std::vector<double>>();
  };
  const auto qs = values("q", {base.dp.q});
  const auto zs = values("z", {base.dp.z});
  const auto ss = values("clip_threshold", {base.dp.clip_threshold});
  std::vector<double> ps;
  if (grid.contains("n_regions"))
    for (const auto& v : grid.at("n_regions")) ps.push_back(v.get<double>());
  else
    ps.push_back(base.n_regions);

  std::vector<ExperimentConfig> configs;
  for (double q : qs)
    for (double z : zs)
      for (double s : ss)
        for (double p : ps) {
          ExperimentConfig c = base;
          c.dp.q = q;
          c.dp.z = z;
          c.dp.clip_threshold = s;
          c.n_regions = static_cast<int>(p);
          c.dp.num_regions = c.n_regions;
          configs.push_back(std::move(c));
        }
  return configs;
}

inline std::vector<SweepPoint> sweep(const ExperimentConfig& base,
                                     const nlohmann::json& grid) {
  std::vector<SweepPoint> points;
  for (const auto& config : expand_grid(base, grid)) {
    validate_or_throw(config);
    points.push_back({config, run_experiment(config)});
  }
  return points;
}

/// Consolidated sweep CSV keyed by the swept parameters.
inline void emit_sweep_csv(const std::vector<SweepPoint>& points,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write " + path);
  out << "q,z,clip_threshold,n_regions,round,mean_simple_regret,"
         "stderr_simple_regret,mean_cum_regret,stderr_cum_regret,"
         "mean_clip_fraction,epsilon\n";
  for (const auto& pt : points) {
    for (const auto& cp : pt.result.curve)
      out << detail::format_double(pt.config.dp.q) << ','
          << detail::format_double(pt.config.dp.z) << ','
          << detail::format_double(pt.config.dp.clip_threshold) << ','
          << pt.config.n_regions << ',' << cp.round << ','
          << detail::format_double(cp.mean_simple) << ','
          << detail::format_double(cp.stderr_simple) << ','
          << detail::format_double(cp.mean_cum) << ','
          << detail::format_double(cp.stderr_cum) << ','
          << detail::format_double(cp.mean_clip_fraction) << ','
          << detail::format_double(cp.epsilon) << '\n';
  }
  if (!out) throw std::runtime_error("emit: write failed for " + path);
}

}  // namespace dpfbo

#endif  // DPFBO_EXPERIMENTS_HPP
