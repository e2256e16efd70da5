// Copyright 2026 The dp-optim Authors
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

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpopt/accountant.hpp"
#include "dpopt/bounds.hpp"
#include "dpopt/csvio.hpp"
#include "dpopt/error.hpp"
#include "dpopt/harness.hpp"
#include "dpopt/optimizer.hpp"

namespace {

using dpopt::format_double;

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void print_error(const std::string& type, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

void cmd_phi(double sigma, double clip, double batch) {
  const dpopt::Phi phi = dpopt::compute_phi(sigma, clip, batch);
  std::cout << format_double(phi.value) << "\n";
}

void cmd_convert_lr(double eta, double beta, double phi,
                    std::optional<std::int64_t> t) {
  std::cout << format_double(dpopt::convert_lr(eta, beta, dpopt::Phi{phi}, t))
            << "\n";
}

void cmd_bounds(double B, double C, double sigma, double beta2,
                std::optional<std::int64_t> t, std::optional<double> alpha,
                bool table) {
  if (table) {
    const std::vector<std::int64_t> ts = {10, 100, 1000, 10000};
    const std::vector<double> alphas = {0.01, 0.05, 0.10};
    dpopt::CsvWriter w(std::cout);
    w.row({"quantity", "t=10", "t=100", "t=1000", "t=10000"});
    for (const char* which : {"fixed_sequence", "martingale"}) {
      for (double a : alphas) {
        std::vector<std::string> cells;
        cells.push_back(std::string(which) + "_alpha=" + format_short(a));
        for (std::int64_t tt : ts) {
          dpopt::BoundQuery q{B, C, sigma, beta2, tt, a};
          const double xi = std::string(which) == "fixed_sequence"
                                ? dpopt::fixed_sequence_bound(q)
                                : dpopt::martingale_bound(q);
          cells.push_back(format_double(xi));
        }
        w.row(cells);
      }
    }
    return;
  }
  if (!t || !alpha)
    throw dpopt::ConfigError("bounds needs --t and --alpha (or --table)");
  dpopt::BoundQuery q{B, C, sigma, beta2, *t, *alpha};
  std::cout << "fixed_sequence," << format_double(dpopt::fixed_sequence_bound(q)) << "\n";
  std::cout << "martingale," << format_double(dpopt::martingale_bound(q)) << "\n";
}

void cmd_account(const std::string& config_path) {
  const dpopt::AccountConfig cfg = dpopt::load_account_config(config_path);
  if (cfg.sampling == dpopt::SamplingMode::kFixedBatch)
    throw dpopt::ConfigError("accounting invalid for fixed-batch mode");
  const double q = cfg.privacy.sampling_q();
  const double sigma = cfg.privacy.noise_multiplier;
  if (!(sigma > 0.0))
    throw dpopt::InfeasibleError("accounting needs noise_multiplier > 0");
  const dpopt::RdpCurve one = dpopt::single_step_curve(q, sigma);
  std::int64_t steps = 0;
  if (cfg.steps) {
    steps = *cfg.steps;
  } else {
    steps = dpopt::calibrate_steps(cfg.privacy);
    std::cout << "calibrated_steps," << steps << "\n";
  }
  const dpopt::RdpCurve composed = dpopt::compose(one, steps);
  const dpopt::EpsilonResult res =
      dpopt::to_epsilon_delta(composed, cfg.privacy.target_delta);
  std::cout << "epsilon," << format_double(res.epsilon) << "\n";
  std::cout << "best_order," << format_double(res.best_order) << "\n";
  std::cout << "order,rdp_epsilon\n";
  for (std::size_t i = 0; i < composed.orders.size(); ++i)
    std::cout << format_double(composed.orders[i]) << ","
              << format_double(composed.values[i]) << "\n";
}

void cmd_run(const std::string& config_path, const std::string& out_dir) {
  const dpopt::ExperimentConfig cfg = dpopt::load_config(config_path);
  const dpopt::RunResult res = dpopt::run(cfg, out_dir);
  std::cout << "steps," << res.steps_run << "\n";
  std::cout << "final_train_loss," << format_double(res.final_train_loss) << "\n";
  std::cout << "final_test_metric," << format_double(res.final_test_metric) << "\n";
  if (res.final_epsilon)
    std::cout << "final_epsilon," << format_double(*res.final_epsilon) << "\n";
  if (!out_dir.empty()) std::cout << "out_dir," << out_dir << "\n";
}

void cmd_experiment(const std::string& name, const std::string& config_path,
                    const std::string& out_dir, std::vector<double> phi_grid,
                    int n_seeds, const std::string& sweep_kind,
                    std::vector<double> sweep_grid) {
  const dpopt::ExperimentConfig cfg = dpopt::load_config(config_path);
  if (name == "sgdm-equivalence") {
    const auto rep = dpopt::experiment_sgdm_equivalence(cfg, out_dir);
    std::cout << "phi," << format_double(rep.phi) << "\n";
    std::cout << "eta_sgdm_limit," << format_double(rep.eta_sgdm_limit) << "\n";
    std::cout << "loss_mse," << format_double(rep.loss_mse) << "\n";
    std::cout << "max_rel_param_dev_forced,"
              << format_double(rep.max_rel_param_dev_forced) << "\n";
  } else if (name == "phi-ablation") {
    if (phi_grid.empty()) {
      const double phi = dpopt::compute_phi(cfg.privacy).value;
      phi_grid = {phi, 10.0 * phi, 0.1 * phi};
    }
    const auto rep = dpopt::experiment_phi_ablation(cfg, phi_grid, n_seeds, out_dir);
    std::cout << "phi," << format_double(rep.phi) << "\n";
    std::cout << "phi_prime,median_final_loss\n";
    for (const auto& row : rep.rows)
      std::cout << format_double(row.phi_prime) << ","
                << format_double(row.median_final_loss) << "\n";
  } else if (name == "sweep") {
    if (sweep_kind.empty() || sweep_grid.empty())
      throw dpopt::ConfigError("sweep needs --sweep and --grid");
    const auto rep = dpopt::experiment_sweeps(
        cfg, dpopt::parse_sweep_kind(sweep_kind), sweep_grid, out_dir);
    std::cout << "value,value2,final_loss\n";
    for (const auto& row : rep.rows)
      std::cout << format_double(row.value) << "," << format_double(row.value2)
                << "," << format_double(row.final_loss) << "\n";
  } else if (name == "deviation") {
    dpopt::ExperimentConfig c = cfg;
    c.diagnostics = true;
    const dpopt::RunResult res = dpopt::run(c, out_dir);
    std::vector<dpopt::PairedMoments> trace;
    for (const auto& snap : res.snapshots)
      trace.push_back({snap.t, snap.v_hat_p, snap.v_hat_c});
    const auto table = dpopt::empirical_deviation(trace, res.phi);
    dpopt::CsvWriter w(std::cout);
    std::vector<std::string> header{"quantity"};
    for (auto t : table.steps) header.push_back("t=" + std::to_string(t));
    w.row(header);
    for (std::size_t j = 0; j < table.levels.size(); ++j) {
      std::vector<std::string> cells{"deviation_alpha=" +
                                     format_short(table.levels[j])};
      for (std::size_t i = 0; i < table.steps.size(); ++i)
        cells.push_back(format_double(table.values[i][j]));
      w.row(cells);
    }
  } else {
    throw dpopt::ConfigError(
        "unknown experiment '" + name +
        "' (expected sgdm-equivalence, phi-ablation, sweep, deviation)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential-privacy optimization toolkit"};
  app.require_subcommand(1);

  // phi
  double phi_sigma = 0.0, phi_clip = 0.0, phi_batch = 0.0;
  auto* phi_cmd = app.add_subcommand("phi", "DP second-moment bias (sigma C / B)^2");
  phi_cmd->add_option("--sigma", phi_sigma)->required();
  phi_cmd->add_option("--C", phi_clip)->required();
  phi_cmd->add_option("--B", phi_batch)->required();

  // convert-lr
  double cl_eta = 0.0, cl_beta = 0.0, cl_phi = 0.0;
  std::int64_t cl_t = -1;
  auto* cl_cmd = app.add_subcommand("convert-lr",
                                    "DP-Adam to DP-SGDM learning-rate conversion");
  cl_cmd->add_option("--eta", cl_eta)->required();
  cl_cmd->add_option("--beta", cl_beta)->required();
  cl_cmd->add_option("--phi", cl_phi)->required();
  cl_cmd->add_option("--t", cl_t, "step (omit for the t->inf limit)");

  // bounds
  double b_B = 0.0, b_C = 0.0, b_sigma = 0.0, b_beta2 = 0.0, b_alpha = -1.0;
  std::int64_t b_t = -1;
  bool b_table = false;
  auto* b_cmd = app.add_subcommand("bounds", "concentration-bound evaluation");
  b_cmd->add_option("--B", b_B)->required();
  b_cmd->add_option("--C", b_C)->required();
  b_cmd->add_option("--sigma", b_sigma)->required();
  b_cmd->add_option("--beta2", b_beta2)->required();
  b_cmd->add_option("--t", b_t);
  b_cmd->add_option("--alpha", b_alpha);
  b_cmd->add_flag("--table", b_table, "emit the full t x alpha CSV table");

  // account
  std::string acc_config;
  auto* acc_cmd = app.add_subcommand("account", "RDP accounting for a config");
  acc_cmd->add_option("config", acc_config)->required();

  // run
  std::string run_config, run_out = "run_out";
  auto* run_cmd = app.add_subcommand("run", "run one training experiment");
  run_cmd->add_option("config", run_config)->required();
  run_cmd->add_option("--out", run_out, "output directory");

  // experiment
  std::string exp_name, exp_config, exp_out = "experiment_out", exp_sweep;
  std::vector<double> exp_phi_grid, exp_grid;
  int exp_seeds = 5;
  auto* exp_cmd = app.add_subcommand("experiment", "predefined experiment suites");
  exp_cmd->add_option("name", exp_name)->required();
  exp_cmd->add_option("config", exp_config)->required();
  exp_cmd->add_option("--out", exp_out);
  exp_cmd->add_option("--phi-grid", exp_phi_grid)->delimiter(',');
  exp_cmd->add_option("--seeds", exp_seeds);
  exp_cmd->add_option("--sweep", exp_sweep, "gamma | gamma_prime | betas");
  exp_cmd->add_option("--grid", exp_grid)->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phi_cmd) cmd_phi(phi_sigma, phi_clip, phi_batch);
    if (*cl_cmd)
      cmd_convert_lr(cl_eta, cl_beta, cl_phi,
                     cl_t >= 1 ? std::optional<std::int64_t>(cl_t) : std::nullopt);
    if (*b_cmd)
      cmd_bounds(b_B, b_C, b_sigma, b_beta2,
                 b_t >= 1 ? std::optional<std::int64_t>(b_t) : std::nullopt,
                 b_alpha > 0.0 ? std::optional<double>(b_alpha) : std::nullopt,
                 b_table);
    if (*acc_cmd) cmd_account(acc_config);
    if (*run_cmd) cmd_run(run_config, run_out);
    if (*exp_cmd)
      cmd_experiment(exp_name, exp_config, exp_out, exp_phi_grid, exp_seeds,
                     exp_sweep, exp_grid);
  } catch (const dpopt::ConfigError& e) {
    print_error("ConfigError", e.what());
    return 2;
  } catch (const dpopt::ShapeError& e) {
    print_error("ShapeError", e.what());
    return 3;
  } catch (const dpopt::InputError& e) {
    print_error("InputError", e.what());
    return 4;
  } catch (const dpopt::DomainError& e) {
    print_error("DomainError", e.what());
    return 5;
  } catch (const dpopt::InfeasibleError& e) {
    print_error("InfeasibleError", e.what());
    return 6;
  } catch (const dpopt::RunAborted& e) {
    print_error("RunAborted", e.what());
    return 7;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return 0;
}
