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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dpfbo/accountant.hpp"
#include "dpfbo/config.hpp"
#include "dpfbo/experiments.hpp"
#include "dpfbo/objectives.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int cmd_run(const std::string& config_path, const std::string& ablation,
            const std::string& out_override, const std::string& stem) {
  dpfbo::ExperimentConfig config = dpfbo::load_config(config_path);
  if (!ablation.empty()) config = dpfbo::ablation_config(config, ablation);
  if (!out_override.empty()) config.output_dir = out_override;
  const dpfbo::ExperimentResult result = dpfbo::run_experiment(config);
  const std::string name =
      stem.empty() ? std::string(dpfbo::algo_name(config.algo)) +
                         (ablation.empty() ? "" : "_" + ablation)
                   : stem;
  dpfbo::emit_all(result, name);
  const auto summary = dpfbo::summary_json(result);
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_override) {
  dpfbo::ExperimentConfig base = dpfbo::load_config(config_path);
  if (!out_override.empty()) base.output_dir = out_override;
  std::ifstream grid_in(grid_path);
  if (!grid_in)
    throw dpfbo::ConfigError("cannot open grid file: " + grid_path);
  nlohmann::json grid;
  try {
    grid_in >> grid;
  } catch (const nlohmann::json::exception& e) {
    throw dpfbo::ConfigError("grid file is not valid JSON: " +
                             std::string(e.what()));
  }
  const auto points = dpfbo::sweep(base, grid);
  std::filesystem::create_directories(base.output_dir);
  const std::string path = base.output_dir + "/sweep.csv";
  dpfbo::emit_sweep_csv(points, path);
  std::cout << "wrote " << path << " (" << points.size()
            << " grid points)\n";
  return kExitOk;
}

int cmd_accountant(double q, double z, int rounds, double delta, int n_agents,
                   int max_order, bool as_json) {
  if (delta <= 0.0) {
    if (n_agents <= 0)
      throw dpfbo::ConfigError(
          "accountant: provide --delta or --n-agents");
    delta = dpfbo::accountant::delta_default(n_agents);
  }
  const auto res = dpfbo::accountant::epsilon(q, z, rounds, delta, max_order);
  if (as_json) {
    nlohmann::json j{{"q", q},          {"z", z},
                     {"T", rounds},     {"delta", delta},
                     {"epsilon", res.epsilon}, {"order", res.order}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "epsilon = " << res.epsilon << " (delta = " << delta
              << ", argmin order m = " << res.order << ")\n";
  }
  return kExitOk;
}

int cmd_gen(bool synthetic, bool hetero, int n_agents, int points,
            double lengthscale, double d, double alpha, std::uint64_t seed,
            const std::string& out_path) {
  if (synthetic == hetero)
    throw dpfbo::ConfigError("gen: pass exactly one of --synthetic/--hetero");
  const dpfbo::Domain domain = dpfbo::build_grid(points);
  const dpfbo::ObjectiveSuite suite =
      synthetic
          ? dpfbo::gen_synthetic(domain, n_agents, lengthscale, d, seed)
          : dpfbo::gen_heterogeneous(domain, n_agents, alpha, lengthscale,
                                     seed);
  dpfbo::save_table(suite, out_path);
  std::cout << "wrote " << out_path << " (" << n_agents << " agents, "
            << points << " grid points)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private federated Thompson sampling simulator"};
  app.require_subcommand(1);

  std::string config_path, grid_path, ablation, out_override, stem;
  auto* run = app.add_subcommand("run", "run one experiment configuration");
  run->add_option("--config", config_path, "config JSON file")->required();
  run->add_option("--ablation", ablation,
                  "uniform-weights | full-domain-init | fixed-temperature");
  run->add_option("--out", out_override, "override output directory");
  run->add_option("--stem", stem, "output file stem");

  auto* sw = app.add_subcommand("sweep", "sweep a parameter grid");
  sw->add_option("--config", config_path, "base config JSON file")->required();
  sw->add_option("--grid", grid_path,
                 "JSON grid over q / z / clip_threshold / n_regions")
      ->required();
  sw->add_option("--out", out_override, "override output directory");

  double q = 0.25, z = 1.0, delta = 0.0;
  int rounds = 40, n_agents = 0, max_order = 64;
  bool as_json = false;
  auto* acc = app.add_subcommand(
      "accountant", "privacy loss of the subsampled Gaussian mechanism");
  acc->add_option("--q", q, "subsampling probability")->required();
  acc->add_option("--z", z, "noise ratio")->required();
  acc->add_option("--T", rounds, "number of rounds")->required();
  acc->add_option("--delta", delta, "target delta");
  acc->add_option("--n-agents", n_agents, "derive delta = N^-1.1");
  acc->add_option("--m-max", max_order, "largest moment order");
  acc->add_flag("--json", as_json, "JSON output");

  bool synthetic = false, hetero = false;
  int points = 1000;
  double lengthscale = 0.03, d = 0.02, alpha = 0.7;
  std::uint64_t seed = 1;
  std::string gen_out = "objective.tbl";
  int gen_agents = 200;
  auto* gen = app.add_subcommand("gen", "generate an objective table file");
  gen->add_flag("--synthetic", synthetic, "perturbed shared GP sample");
  gen->add_flag("--hetero", hetero, "mixture of independent GP samples");
  gen->add_option("--n-agents", gen_agents, "number of agents");
  gen->add_option("--points", points, "grid size");
  gen->add_option("--lengthscale", lengthscale, "SE kernel lengthscale");
  gen->add_option("--d", d, "synthetic perturbation magnitude");
  gen->add_option("--alpha", alpha, "heterogeneity mixing coefficient");
  gen->add_option("--seed", seed, "generation seed");
  gen->add_option("--out", gen_out, "output path")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed())
      return cmd_run(config_path, ablation, out_override, stem);
    if (sw->parsed()) return cmd_sweep(config_path, grid_path, out_override);
    if (acc->parsed())
      return cmd_accountant(q, z, rounds, delta, n_agents, max_order,
                            as_json);
    if (gen->parsed())
      return cmd_gen(synthetic, hetero, gen_agents, points, lengthscale, d,
                     alpha, seed, gen_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const dpfbo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
