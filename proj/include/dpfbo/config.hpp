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

#ifndef DPFBO_CONFIG_HPP
#define DPFBO_CONFIG_HPP

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpfbo/kernel.hpp"
#include "dpfbo/mechanism.hpp"
#include "dpfbo/protocol.hpp"
#include "dpfbo/surrogate.hpp"
#include "dpfbo/weights.hpp"
#include "json.hpp"

namespace dpfbo {

/// Raised on invalid or inconsistent configuration; the CLI maps it to
/// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algo { kTs, kFts, kFtsDe, kDpFts, kDpFtsDe };

inline const char* algo_name(Algo a) {
  switch (a) {
    case Algo::kTs: return "ts";
    case Algo::kFts: return "fts";
    case Algo::kFtsDe: return "fts-de";
    case Algo::kDpFts: return "dp-fts";
    case Algo::kDpFtsDe: return "dp-fts-de";
  }
  return "?";
}

inline Algo algo_from_name(const std::string& name) {
  if (name == "ts") return Algo::kTs;
  if (name == "fts") return Algo::kFts;
  if (name == "fts-de") return Algo::kFtsDe;
  if (name == "dp-fts") return Algo::kDpFts;
  if (name == "dp-fts-de") return Algo::kDpFtsDe;
  throw ConfigError("unknown algo preset: " + name);
}

struct ObjectiveConfig {
  std::string kind = "synthetic";  // synthetic | heterogeneous | table
  double lengthscale = 0.03;
  double perturbation = 0.02;  // d
  double alpha = 0.7;          // heterogeneity mixing
  std::string path;            // table file
};

struct DomainConfig {
  int dims = 1;
  int points_per_dim = 1000;
};

/// Full experiment description; a single JSON document.
struct ExperimentConfig {
  Algo algo = Algo::kDpFtsDe;
  int n_agents = 200;
  int n_regions = 2;   // P
  int n_features = 50; // M
  int horizon = 40;    // T
  int n_init = 10;

  KernelSpec kernel{0.03, 1.0, 0.01};
  std::string lambda_mode = "practical";  // practical | theory | fixed
  double lambda_value = 0.0;

  DpParams dp{0.25, 1.0, 11.0, 2};
  double dp_delta = 0.0;  // 0 -> N^{-1.1}

  PSchedule p;
  WeightSchedule weight_schedule;
  std::string weights_mode = "adaptive";  // adaptive | fixed-temperature | uniform
  std::string weights_preset = "synthetic";

  BetaSchedule beta;
  std::string ts_mode = "rff";
  int t_cutoff = 0;  // 0 -> no cutoff

  ObjectiveConfig objective;
  DomainConfig domain;
  bool full_domain_init = false;

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";
  int num_threads = 0;  // 0 -> DPFBO_THREADS env or hardware concurrency

  double resolved_lambda() const {
    if (lambda_mode == "practical") return kernel.obs_noise;
    if (lambda_mode == "theory") return 1.0 + 2.0 / horizon;
    if (lambda_mode == "fixed") return lambda_value;
    throw ConfigError("unknown lambda mode: " + lambda_mode);
  }

  double resolved_delta() const {
    return dp_delta > 0.0
               ? dp_delta
               : std::pow(static_cast<double>(n_agents), -1.1);
  }

  bool server_enabled() const { return algo != Algo::kTs; }

  ProtocolConfig protocol() const {
    ProtocolConfig pc;
    pc.p = p;
    pc.horizon = horizon;
    pc.n_init = n_init;
    pc.t_cutoff = t_cutoff > 0 ? t_cutoff : kNoCutoff;
    pc.lambda = resolved_lambda();
    pc.beta = beta;
    pc.ts_mode = ts_mode == "exact" ? TsMode::kExact : TsMode::kRff;
    pc.full_domain_init = full_domain_init;
    return pc;
  }

  int resolved_threads() const {
    if (num_threads > 0) return num_threads;
    if (const char* env = std::getenv("DPFBO_THREADS"))
      return std::max(1, std::atoi(env));
    return 0;
  }
};

namespace detail {
inline std::string p_kind_name(PSchedule::Kind k) {
  switch (k) {
    case PSchedule::Kind::kInvSqrtT: return "inv-sqrt-t";
    case PSchedule::Kind::kInvT: return "inv-t";
    case PSchedule::Kind::kInvTSq: return "inv-t-sq";
    case PSchedule::Kind::kConstant: return "constant";
    case PSchedule::Kind::kTable: return "table";
  }
  return "?";
}

inline PSchedule::Kind p_kind_from_name(const std::string& name) {
  if (name == "inv-sqrt-t") return PSchedule::Kind::kInvSqrtT;
  if (name == "inv-t") return PSchedule::Kind::kInvT;
  if (name == "inv-t-sq") return PSchedule::Kind::kInvTSq;
  if (name == "constant") return PSchedule::Kind::kConstant;
  if (name == "table") return PSchedule::Kind::kTable;
  throw ConfigError("unknown p-schedule kind: " + name);
}

inline std::string weights_mode_name(WeightSchedule::Mode m) {
  switch (m) {
    case WeightSchedule::Mode::kAdaptive: return "adaptive";
    case WeightSchedule::Mode::kFixedTemperature: return "fixed-temperature";
    case WeightSchedule::Mode::kUniform: return "uniform";
  }
  return "?";
}

inline WeightSchedule::Mode weights_mode_from_name(const std::string& name) {
  if (name == "adaptive") return WeightSchedule::Mode::kAdaptive;
  if (name == "fixed-temperature")
    return WeightSchedule::Mode::kFixedTemperature;
  if (name == "uniform") return WeightSchedule::Mode::kUniform;
  throw ConfigError("unknown weights mode: " + name);
}
}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["algo"] = algo_name(c.algo);
  j["n_agents"] = c.n_agents;
  j["n_regions"] = c.n_regions;
  j["n_features"] = c.n_features;
  j["horizon"] = c.horizon;
  j["n_init"] = c.n_init;
  j["kernel"] = {{"lengthscale", c.kernel.lengthscale},
                 {"signal_variance", c.kernel.signal_variance},
                 {"noise_variance", c.kernel.obs_noise}};
  j["lambda"] = {{"mode", c.lambda_mode}, {"value", c.lambda_value}};
  j["dp"] = {{"q", c.dp.q},
             {"z", c.dp.z},
             {"clip_threshold", std::isinf(c.dp.clip_threshold)
                                    ? nlohmann::json()
                                    : nlohmann::json(c.dp.clip_threshold)},
             {"delta", c.dp_delta}};
  j["p_schedule"] = {{"kind", detail::p_kind_name(c.p.kind)},
                     {"value", c.p.constant},
                     {"table", c.p.table}};
  j["weights"] = {{"preset", c.weights_preset},
                  {"mode", c.weights_mode},
                  {"sharpness", c.weight_schedule.sharpness},
                  {"hold_value", c.weight_schedule.hold_value},
                  {"hold_len", c.weight_schedule.hold_len},
                  {"decay_len", c.weight_schedule.decay_len}};
  j["beta"] = {{"mode", c.beta.mode == BetaSchedule::Mode::kConstant
                            ? "constant"
                            : "theory"},
               {"value", c.beta.constant},
               {"rkhs_bound", c.beta.rkhs_bound},
               {"delta", c.beta.delta}};
  j["ts_mode"] = c.ts_mode;
  j["t_cutoff"] = c.t_cutoff;
  j["objective"] = {{"kind", c.objective.kind},
                    {"lengthscale", c.objective.lengthscale},
                    {"perturbation", c.objective.perturbation},
                    {"alpha", c.objective.alpha},
                    {"path", c.objective.path}};
  j["domain"] = {{"dims", c.domain.dims},
                 {"points_per_dim", c.domain.points_per_dim}};
  j["full_domain_init"] = c.full_domain_init;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["num_threads"] = c.num_threads;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("algo")) c.algo = algo_from_name(j.at("algo"));
    c.n_agents = j.value("n_agents", c.n_agents);
    c.n_regions = j.value("n_regions", c.n_regions);
    c.n_features = j.value("n_features", c.n_features);
    c.horizon = j.value("horizon", c.horizon);
    c.n_init = j.value("n_init", c.n_init);
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      c.kernel.lengthscale = k.value("lengthscale", c.kernel.lengthscale);
      c.kernel.signal_variance =
          k.value("signal_variance", c.kernel.signal_variance);
      c.kernel.obs_noise = k.value("noise_variance", c.kernel.obs_noise);
    }
    if (j.contains("lambda")) {
      c.lambda_mode = j.at("lambda").value("mode", c.lambda_mode);
      c.lambda_value = j.at("lambda").value("value", c.lambda_value);
    }
    if (j.contains("dp")) {
      const auto& d = j.at("dp");
      c.dp.q = d.value("q", c.dp.q);
      c.dp.z = d.value("z", c.dp.z);
      if (d.contains("clip_threshold")) {
        c.dp.clip_threshold =
            d.at("clip_threshold").is_null()
                ? std::numeric_limits<double>::infinity()
                : d.at("clip_threshold").get<double>();
      }
      c.dp_delta = d.value("delta", c.dp_delta);
    }
    if (j.contains("p_schedule")) {
      const auto& p = j.at("p_schedule");
      if (p.contains("kind"))
        c.p.kind = detail::p_kind_from_name(p.at("kind"));
      c.p.constant = p.value("value", c.p.constant);
      if (p.contains("table"))
        c.p.table = p.at("table").get<std::vector<double>>();
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      c.weights_preset = w.value("preset", c.weights_preset);
      if (c.weights_preset == "synthetic")
        c.weight_schedule = WeightSchedule::synthetic();
      else if (c.weights_preset == "real")
        c.weight_schedule = WeightSchedule::real();
      else if (c.weights_preset != "custom")
        throw ConfigError("unknown weights preset: " + c.weights_preset);
      c.weights_mode = w.value("mode", c.weights_mode);
      c.weight_schedule.sharpness =
          w.value("sharpness", c.weight_schedule.sharpness);
      c.weight_schedule.hold_value =
          w.value("hold_value", c.weight_schedule.hold_value);
      c.weight_schedule.hold_len =
          w.value("hold_len", c.weight_schedule.hold_len);
      c.weight_schedule.decay_len =
          w.value("decay_len", c.weight_schedule.decay_len);
    }
    c.weight_schedule.mode = detail::weights_mode_from_name(c.weights_mode);
    if (j.contains("beta")) {
      const auto& b = j.at("beta");
      const std::string mode = b.value("mode", std::string("theory"));
      if (mode == "constant")
        c.beta.mode = BetaSchedule::Mode::kConstant;
      else if (mode == "theory")
        c.beta.mode = BetaSchedule::Mode::kTheory;
      else
        throw ConfigError("unknown beta mode: " + mode);
      c.beta.constant = b.value("value", c.beta.constant);
      c.beta.rkhs_bound = b.value("rkhs_bound", c.beta.rkhs_bound);
      c.beta.delta = b.value("delta", c.beta.delta);
    }
    c.ts_mode = j.value("ts_mode", c.ts_mode);
    c.t_cutoff = j.value("t_cutoff", c.t_cutoff);
    if (j.contains("objective")) {
      const auto& o = j.at("objective");
      c.objective.kind = o.value("kind", c.objective.kind);
      c.objective.lengthscale =
          o.value("lengthscale", c.objective.lengthscale);
      c.objective.perturbation =
          o.value("perturbation", c.objective.perturbation);
      c.objective.alpha = o.value("alpha", c.objective.alpha);
      c.objective.path = o.value("path", c.objective.path);
    }
    if (j.contains("domain")) {
      c.domain.dims = j.at("domain").value("dims", c.domain.dims);
      c.domain.points_per_dim =
          j.at("domain").value("points_per_dim", c.domain.points_per_dim);
    }
    c.full_domain_init = j.value("full_domain_init", c.full_domain_init);
    if (j.contains("seeds"))
      c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.num_threads = j.value("num_threads", c.num_threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  c.dp.num_regions = c.n_regions;
  // beta theory mode reads the observation noise std from the kernel block
  c.beta.obs_noise_std = std::sqrt(c.kernel.obs_noise);
  return c;
}

/// Collects every violated constraint; empty result means the config is
/// runnable.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  check(c.n_agents >= 1, "n_agents must be >= 1");
  check(c.n_regions >= 1, "n_regions must be >= 1");
  check(c.n_features >= 2 && c.n_features % 2 == 0,
        "n_features must be even and >= 2");
  check(c.horizon >= 0, "horizon must be >= 0");
  check(c.n_init >= 0, "n_init must be >= 0");
  check(c.domain.dims >= 1, "domain dims must be >= 1");
  check(c.domain.points_per_dim >= 1, "domain needs at least one point");
  check(c.dp.q > 0.0 && c.dp.q <= 1.0, "dp.q must be in (0, 1]");
  check(c.dp.z >= 0.0, "dp.z must be >= 0");
  check(c.dp.clip_threshold > 0.0, "dp.clip_threshold must be positive");
  check(!(c.dp.z > 0.0 && std::isinf(c.dp.clip_threshold)),
        "dp.z > 0 requires a finite clip threshold");
  check(c.seeds.size() >= 1, "at least one seed required");
  if (c.p.kind == PSchedule::Kind::kConstant)
    check(c.p.constant > 0.0 && c.p.constant <= 1.0,
          "constant p must be in (0, 1]");
  if (c.p.kind == PSchedule::Kind::kTable) {
    check(!c.p.table.empty(), "p table must be nonempty");
    for (double v : c.p.table)
      if (!(v > 0.0) || v > 1.0) {
        problems.push_back("p table values must be in (0, 1]");
        break;
      }
  }
  if (c.lambda_mode == "fixed")
    check(c.lambda_value > 0.0, "fixed lambda must be positive");
  else
    check(c.lambda_mode == "practical" || c.lambda_mode == "theory",
          "lambda mode must be practical, theory or fixed");
  check(c.ts_mode == "rff" || c.ts_mode == "exact",
        "ts_mode must be rff or exact");
  if (c.objective.kind == "heterogeneous")
    check(c.objective.alpha >= 0.0 && c.objective.alpha <= 1.0,
          "objective alpha must be in [0, 1]");
  else if (c.objective.kind == "table")
    check(!c.objective.path.empty(), "table objective requires a path");
  else
    check(c.objective.kind == "synthetic",
          "objective kind must be synthetic, heterogeneous or table");

  // Preset constraints.
  const bool no_dp = c.dp.z == 0.0 && c.dp.q == 1.0 &&
                     std::isinf(c.dp.clip_threshold);
  switch (c.algo) {
    case Algo::kTs:
      check(c.p.kind == PSchedule::Kind::kConstant && c.p.constant == 1.0,
            "ts preset requires a constant p schedule with p = 1");
      break;
    case Algo::kFts:
      check(c.n_regions == 1, "fts preset requires P = 1");
      check(no_dp, "fts preset requires q = 1, z = 0 and no clipping");
      break;
    case Algo::kFtsDe:
      check(no_dp, "fts-de preset requires q = 1, z = 0 and no clipping");
      break;
    case Algo::kDpFts:
      check(c.n_regions == 1, "dp-fts preset requires P = 1");
      break;
    case Algo::kDpFtsDe:
      break;
  }
  return problems;
}

inline void validate_or_throw(const ExperimentConfig& c) {
  const auto problems = validate(c);
  if (problems.empty()) return;
  std::ostringstream msg;
  msg << "invalid config (" << problems.size() << " problem"
      << (problems.size() == 1 ? "" : "s") << "):";
  for (const auto& p : problems) msg << "\n  - " << p;
  throw ConfigError(msg.str());
}

/// Ready-to-run defaults for each algorithm on the synthetic benchmark.
inline ExperimentConfig default_config(Algo algo) {
  ExperimentConfig c;
  c.algo = algo;
  switch (algo) {
    case Algo::kTs:
      c.p.kind = PSchedule::Kind::kConstant;
      c.p.constant = 1.0;
      c.n_regions = 1;
      c.dp = DpParams{1.0, 0.0, std::numeric_limits<double>::infinity(), 1};
      break;
    case Algo::kFts:
      c.n_regions = 1;
      c.dp = DpParams{1.0, 0.0, std::numeric_limits<double>::infinity(), 1};
      break;
    case Algo::kFtsDe:
      c.n_regions = 2;
      c.dp = DpParams{1.0, 0.0, std::numeric_limits<double>::infinity(), 2};
      break;
    case Algo::kDpFts:
      c.n_regions = 1;
      c.dp = DpParams{0.25, 1.0, 8.0, 1};
      break;
    case Algo::kDpFtsDe:
      c.n_regions = 2;
      c.dp = DpParams{0.25, 1.0, 11.0, 2};
      break;
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  ExperimentConfig c = config_from_json(j);
  validate_or_throw(c);
  return c;
}

}  // namespace dpfbo

#endif  // DPFBO_CONFIG_HPP
