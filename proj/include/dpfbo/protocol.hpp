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

#ifndef DPFBO_PROTOCOL_HPP
#define DPFBO_PROTOCOL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dpfbo/accountant.hpp"
#include "dpfbo/domain.hpp"
#include "dpfbo/mechanism.hpp"
#include "dpfbo/objectives.hpp"
#include "dpfbo/rff.hpp"
#include "dpfbo/rng.hpp"
#include "dpfbo/surrogate.hpp"
#include "dpfbo/weights.hpp"

// Per-round state machines of the federated loop. Round 0 is initialization
// only: every agent queries N_init points inside its assigned sub-region and
// nothing leaves any agent, so the ledger is not charged. The first
// aggregation happens at the end of round 1, and agents at round t act on
// the broadcast produced at round t-1; round 1 therefore forces the local-TS
// branch. All randomness is drawn from streams derived from (seed, purpose,
// agent, round), which makes results independent of worker-thread count.

namespace dpfbo {

inline constexpr double kMinBranchProbability = 1e-6;
inline constexpr int kNoCutoff = std::numeric_limits<int>::max();

/// Probability of taking the local-TS branch at round t.
struct PSchedule {
  enum class Kind { kInvSqrtT, kInvT, kInvTSq, kConstant, kTable };
  Kind kind = Kind::kInvSqrtT;
  double constant = 1.0;
  std::vector<double> table;  // table[t-1]; the last entry persists
};

struct PValue {
  double p = 1.0;
  bool clamped = false;
};

inline PValue p_schedule(int t, const PSchedule& sched) {
  if (t < 1) throw std::invalid_argument("p_schedule: t must be >= 1");
  double p = 1.0;
  switch (sched.kind) {
    case PSchedule::Kind::kInvSqrtT:
      p = 1.0 - 1.0 / std::sqrt(static_cast<double>(t));
      break;
    case PSchedule::Kind::kInvT:
      p = 1.0 - 1.0 / static_cast<double>(t);
      break;
    case PSchedule::Kind::kInvTSq:
      p = 1.0 - 1.0 / (static_cast<double>(t) * static_cast<double>(t));
      break;
    case PSchedule::Kind::kConstant:
      p = sched.constant;
      break;
    case PSchedule::Kind::kTable: {
      if (sched.table.empty())
        throw std::invalid_argument("p_schedule: empty table");
      const std::size_t i =
          std::min<std::size_t>(t - 1, sched.table.size() - 1);
      p = sched.table[i];
      break;
    }
  }
  if (p > 1.0) throw std::invalid_argument("p_schedule: p_t > 1");
  if (p < kMinBranchProbability) return {kMinBranchProbability, true};
  return {p, false};
}

struct ProtocolConfig {
  PSchedule p;
  int horizon = 40;  // T
  int n_init = 10;
  int t_cutoff = kNoCutoff;
  double lambda = 0.01;
  BetaSchedule beta;
  TsMode ts_mode = TsMode::kRff;
  int exact_grid_cap = 2000;
  bool full_domain_init = false;
};

enum class Branch { kInit, kLocalTs, kBroadcast, kPostCutoff };

inline const char* branch_name(Branch b) {
  switch (b) {
    case Branch::kInit: return "init";
    case Branch::kLocalTs: return "local-ts";
    case Branch::kBroadcast: return "broadcast";
    case Branch::kPostCutoff: return "post-cutoff";
  }
  return "?";
}

struct TraceRow {
  int agent = 0;
  int round = 0;
  Branch branch = Branch::kInit;
  int grid_id = 0;
  double f_value = 0.0;
  double y = 0.0;
  double simple_regret = 0.0;
  double cum_regret = 0.0;
};

struct RoundRecord {
  int round = 0;
  double p_t = 1.0;
  bool p_clamped = false;
  bool aggregated = false;
  int subsampled = 0;
  double clip_fraction = 0.0;
  double epsilon = 0.0;
};

struct RunTrace {
  int num_agents = 0;
  int horizon = 0;
  std::vector<TraceRow> rows;        // (T+1) * N, laid out round-major
  std::vector<RoundRecord> rounds;   // T+1 entries, index = round
  std::vector<Broadcast> broadcasts; // index = producing round (0 unused)
  std::vector<int> assignment;       // agent -> region

  const TraceRow& row(int round, int agent) const {
    return rows[static_cast<std::size_t>(round) * num_agents + agent];
  }
};

struct AgentState {
  int id = 0;
  int region = 0;
  History history;
  FeaturePosterior posterior;
  double optimum = 0.0;    // f^n(x^{n,*})
  double best_seen = -std::numeric_limits<double>::infinity();
  double cum_regret = 0.0;
};

struct StepResult {
  Branch branch = Branch::kLocalTs;
  int grid_id = 0;
  double f_value = 0.0;
  double y = 0.0;
  bool sent = false;
  Eigen::VectorXd omega;  // valid when sent
};

/// Everything a single-seed simulation needs. Pointees must outlive the run.
struct SimulationInputs {
  const Domain* domain = nullptr;
  const Partition* partition = nullptr;
  const ObjectiveSuite* suite = nullptr;
  const RffMap* rff = nullptr;
  WeightSchedule weight_schedule;
  DpParams dp;
  ProtocolConfig protocol;
  double obs_noise_std = 0.1;
  std::uint64_t seed = 0;
  bool server_enabled = true;  // plain TS runs without a server
  int num_threads = 0;         // 0 = hardware concurrency
};

namespace detail {
template <typename Fn>
void parallel_for(int count, int num_threads, Fn&& fn) {
  if (num_threads <= 0)
    num_threads = static_cast<int>(std::thread::hardware_concurrency());
  num_threads = std::max(1, std::min(num_threads, count));
  if (num_threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(num_threads);
  for (int w = 0; w < num_threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += num_threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}
}  // namespace detail

/// One federated run for one seed.
class Simulation {
 public:
  explicit Simulation(const SimulationInputs& in) : in_(in) {
    if (!in.domain || !in.partition || !in.suite || !in.rff)
      throw std::invalid_argument("simulation: missing inputs");
    if (in.suite->grid_size() != in.domain->size())
      throw std::invalid_argument(
          "simulation: objective table does not match the grid");
    in_.dp.validate();
    grid_features_ = in.rff->features_matrix(in.domain->grid);
    region_ids_.resize(in.partition->num_regions);
    for (int id = 0; id < in.domain->size(); ++id)
      region_ids_[in.partition->region_of_point[id]].push_back(id);
  }

  /// Builds agent state and queries N_init initial points uniformly without
  /// replacement from the agent's sub-region (or the whole grid under the
  /// full-domain-init ablation). Returns the observations for the trace.
  std::vector<std::pair<int, Observation>> agent_init(AgentState& state) {
    const auto& pool = in_.protocol.full_domain_init
                           ? all_ids()
                           : region_ids_[state.region];
    if (static_cast<int>(pool.size()) < in_.protocol.n_init)
      throw std::runtime_error(
          "agent_init: sub-region holds " + std::to_string(pool.size()) +
          " grid points, fewer than N_init = " +
          std::to_string(in_.protocol.n_init));
    auto eng = rng::derive(in_.seed, rng::Stream::kInit,
                           {static_cast<std::uint64_t>(state.id)});
    std::vector<int> candidates = pool;
    std::vector<std::pair<int, Observation>> picks;
    picks.reserve(in_.protocol.n_init);
    for (int k = 0; k < in_.protocol.n_init; ++k) {
      const std::size_t j =
          k + rng::uniform_int(eng, candidates.size() - k);
      std::swap(candidates[k], candidates[j]);
      const int id = candidates[k];
      const Observation obs =
          evaluate(*in_.suite, state.id, id, in_.obs_noise_std, eng);
      state.history.append(in_.domain->point(id), obs.y);
      state.best_seen = std::max(state.best_seen, obs.f_true);
      picks.emplace_back(id, obs);
    }
    state.posterior = in_.protocol.n_init > 0
                          ? FeaturePosterior::fit(state.history, *in_.rff,
                                                  in_.protocol.lambda)
                          : FeaturePosterior::prior(in_.rff->num_features,
                                                    in_.protocol.lambda);
    return picks;
  }

  /// One agent round: pick a branch, query, observe, update the posterior,
  /// and (before the cutoff) sample a fresh omega to send.
  StepResult agent_step(AgentState& state, int t, const Broadcast* prev,
                        double p_t) {
    auto eng = rng::derive(in_.seed, rng::Stream::kAgentRound,
                           {static_cast<std::uint64_t>(state.id),
                            static_cast<std::uint64_t>(t)});
    StepResult result;
    const bool past_cutoff = t > in_.protocol.t_cutoff;
    bool use_local = true;
    if (past_cutoff) {
      result.branch = Branch::kPostCutoff;
    } else if (t == 1) {
      result.branch = Branch::kLocalTs;  // no broadcast exists yet
    } else {
      const double r = rng::u01(eng);
      use_local = r <= p_t;
      result.branch = use_local ? Branch::kLocalTs : Branch::kBroadcast;
    }

    if (result.branch == Branch::kBroadcast) {
      if (prev == nullptr)
        throw std::runtime_error(
            "agent_step: broadcast branch taken without a broadcast");
      result.grid_id = broadcast_argmax(*prev);
    } else {
      result.grid_id = local_ts_argmax(state, t, eng);
    }

    const Observation obs = evaluate(*in_.suite, state.id, result.grid_id,
                                     in_.obs_noise_std, eng);
    result.f_value = obs.f_true;
    result.y = obs.y;
    state.history.append(in_.domain->point(result.grid_id), obs.y);
    state.posterior.append(
        grid_features_.row(result.grid_id).transpose(), obs.y);
    state.best_seen = std::max(state.best_seen, obs.f_true);
    state.cum_regret += state.optimum - obs.f_true;

    if (!past_cutoff && in_.server_enabled) {
      result.omega = state.posterior.sample_omega(eng);
      result.sent = true;
    }
    return result;
  }

  struct ServerResult {
    Broadcast broadcast;
    ClipStats stats;
    int selected_count = 0;
  };

  /// Server side of round t: subsample, clip, aggregate with the round-t
  /// weight matrix, charge the ledger.
  ServerResult server_round(const Eigen::MatrixXd& received, int t,
                            const Assignment& assignment,
                            accountant::PrivacyLedger* ledger) {
    const WeightMatrix wm = weights(assignment, t, in_.weight_schedule);
    auto sub_eng = rng::derive(in_.seed, rng::Stream::kSubsample,
                               {static_cast<std::uint64_t>(t)});
    const std::vector<int> selected =
        subsample(static_cast<int>(received.rows()), in_.dp.q, sub_eng);
    auto noise_eng = rng::derive(in_.seed, rng::Stream::kNoise,
                                 {static_cast<std::uint64_t>(t)});
    auto [broadcast, stats] =
        aggregate(received, selected, wm.w, in_.dp, noise_eng, t);
    if (ledger != nullptr) ledger->record_round();
    return {std::move(broadcast), std::move(stats),
            static_cast<int>(selected.size())};
  }

  RunTrace run() {
    const int num_agents = in_.suite->num_agents();
    const int horizon = in_.protocol.horizon;
    auto assign_eng = rng::derive(in_.seed, rng::Stream::kAssignment);
    const Assignment assignment =
        assign_agents(num_agents, in_.partition->num_regions, assign_eng);

    std::vector<AgentState> agents(num_agents);
    for (int n = 0; n < num_agents; ++n) {
      agents[n].id = n;
      agents[n].region = assignment.region_of_agent[n];
      agents[n].optimum = in_.suite->optimum(n).first;
    }

    RunTrace trace;
    trace.num_agents = num_agents;
    trace.horizon = horizon;
    trace.rows.resize(static_cast<std::size_t>(horizon + 1) * num_agents);
    trace.rounds.resize(horizon + 1);
    trace.broadcasts.resize(horizon + 1);
    trace.assignment = assignment.region_of_agent;

    const bool track_privacy = in_.server_enabled && in_.dp.z > 0.0;
    accountant::PrivacyLedger ledger;
    if (track_privacy)
      ledger = accountant::PrivacyLedger::open(
          in_.dp.q, in_.dp.z, accountant::delta_default(num_agents));
    const double idle_epsilon =
        in_.server_enabled ? std::numeric_limits<double>::infinity() : 0.0;

    // Round 0: initialization.
    detail::parallel_for(num_agents, in_.num_threads, [&](int n) {
      const auto picks = agent_init(agents[n]);
      TraceRow row;
      row.agent = n;
      row.round = 0;
      row.branch = Branch::kInit;
      if (picks.empty()) {
        row.grid_id = -1;
      } else {
        int best_id = picks.front().first;
        Observation best = picks.front().second;
        for (const auto& [id, obs] : picks)
          if (obs.f_true > best.f_true) best_id = id, best = obs;
        row.grid_id = best_id;
        row.f_value = best.f_true;
        row.y = best.y;
      }
      row.simple_regret = agents[n].optimum - agents[n].best_seen;
      row.cum_regret = 0.0;
      trace.rows[n] = row;
    });
    trace.rounds[0] = RoundRecord{0, 1.0, false, false, 0, 0.0,
                                  track_privacy ? 0.0 : idle_epsilon};

    Eigen::MatrixXd received(num_agents, in_.rff->num_features);
    for (int t = 1; t <= horizon; ++t) {
      const PValue pv = p_schedule(t, in_.protocol.p);
      const Broadcast* prev =
          t >= 2 && in_.server_enabled && (t - 1) <= in_.protocol.t_cutoff
              ? &trace.broadcasts[t - 1]
              : nullptr;
      std::vector<StepResult> results(num_agents);
      detail::parallel_for(num_agents, in_.num_threads, [&](int n) {
        results[n] = agent_step(agents[n], t, prev, pv.p);
      });

      RoundRecord rec;
      rec.round = t;
      rec.p_t = pv.p;
      rec.p_clamped = pv.clamped;
      const bool aggregate_now =
          in_.server_enabled && t <= in_.protocol.t_cutoff;
      if (aggregate_now) {
        for (int n = 0; n < num_agents; ++n)
          received.row(n) = results[n].omega.transpose();
        ServerResult server = server_round(received, t, assignment,
                                           track_privacy ? &ledger : nullptr);
        trace.broadcasts[t] = std::move(server.broadcast);
        rec.aggregated = true;
        rec.subsampled = server.selected_count;
        rec.clip_fraction = server.stats.fraction;
      }
      rec.epsilon = track_privacy ? ledger.current().epsilon : idle_epsilon;
      trace.rounds[t] = rec;

      for (int n = 0; n < num_agents; ++n) {
        TraceRow row;
        row.agent = n;
        row.round = t;
        row.branch = results[n].branch;
        row.grid_id = results[n].grid_id;
        row.f_value = results[n].f_value;
        row.y = results[n].y;
        row.simple_regret = agents[n].optimum - agents[n].best_seen;
        row.cum_regret = agents[n].cum_regret;
        trace.rows[static_cast<std::size_t>(t) * num_agents + n] = row;
      }
    }
    return trace;
  }

  const Eigen::MatrixXd& grid_features() const { return grid_features_; }

 private:
  int local_ts_argmax(const AgentState& state, int t, rng::Engine& eng) {
    const double beta = beta_value(in_.protocol.beta, t, in_.domain->dims);
    if (in_.protocol.ts_mode == TsMode::kRff) {
      const Eigen::VectorXd values =
          sample_ts_function(state.posterior, beta, grid_features_, eng);
      return argmax_lowest_id(values);
    }
    KernelSpec kernel = in_.rff->kernel;
    const GpPosterior exact =
        GpPosterior::fit(state.history, kernel, in_.protocol.lambda);
    const Eigen::VectorXd values = sample_ts_function_exact(
        exact, beta, in_.domain->grid, eng, in_.protocol.exact_grid_cap);
    return argmax_lowest_id(values);
  }

  int broadcast_argmax(const Broadcast& broadcast) const {
    // Every grid point is scored with its own region's vector; the argmax is
    // global across regions.
    Eigen::MatrixXd scores(in_.domain->size(), broadcast.num_regions());
    for (int i = 0; i < broadcast.num_regions(); ++i)
      scores.col(i) = grid_features_ * broadcast.per_region[i];
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int id = 0; id < in_.domain->size(); ++id) {
      const double v = scores(id, in_.partition->region_of_point[id]);
      if (v > best_value) {
        best_value = v;
        best = id;
      }
    }
    return best;
  }

  const std::vector<int>& all_ids() {
    if (all_ids_.empty()) {
      all_ids_.resize(in_.domain->size());
      for (int id = 0; id < in_.domain->size(); ++id) all_ids_[id] = id;
    }
    return all_ids_;
  }

  SimulationInputs in_;
  Eigen::MatrixXd grid_features_;  // |X| x M
  std::vector<std::vector<int>> region_ids_;
  std::vector<int> all_ids_;
};

}  // namespace dpfbo

#endif  // DPFBO_PROTOCOL_HPP
