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

#ifndef DPOPT_HARNESS_HPP_
#define DPOPT_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpopt/dataset.hpp"
#include "dpopt/diagnostics.hpp"
#include "dpopt/model.hpp"
#include "dpopt/optimizer.hpp"
#include "dpopt/privatizer.hpp"

namespace dpopt {

inline constexpr const char* kVersion = "dp-optim 0.1.0";

enum class SamplingMode { kPoisson, kFixedBatch };

struct DatasetSpec {
  TaskKind task = TaskKind::kRegression;
  std::size_t n = 0;
  std::size_t p = 0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kLinearRegression;
  std::vector<std::size_t> hidden;  // mlp only
};

struct SeedSet {
  std::uint64_t data = 1;
  std::uint64_t noise = 2;
  std::uint64_t init = 3;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  ModelSpec model;
  OptimizerConfig optimizer;
  PrivacySpec privacy;
  std::optional<std::int64_t> steps;  // exactly one of steps / epsilon budget
  bool use_epsilon_budget = false;
  std::int64_t eval_every = 10;
  bool diagnostics = false;
  SamplingMode sampling = SamplingMode::kPoisson;
  double init_scale = 0.0;
  SeedSet seeds;

  void validate() const;
};

// Strict JSON parsing: unknown keys anywhere are configuration errors.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json_text(const ExperimentConfig& config);

// Slim config for privacy-accounting-only commands: {"privacy": {...}}
// plus optional "steps". Accepts a full experiment config too.
struct AccountConfig {
  PrivacySpec privacy;
  std::optional<std::int64_t> steps;
  SamplingMode sampling = SamplingMode::kPoisson;
};
AccountConfig load_account_config(const std::string& path);

struct StepRecord {
  std::int64_t step = 0;
  double train_loss = 0.0;
  double test_metric = 0.0;
  std::optional<double> epsilon_spent;  // absent in fixed-batch mode
  double grad_norm_mean = 0.0;
  std::optional<double> m_hat_p_mean, v_hat_p_mean, v_hat_c_mean, v_hat_corr_mean;
};

struct RunResult {
  std::string out_dir;
  std::vector<StepRecord> records;
  std::int64_t steps_run = 0;
  double phi = 0.0;
  double final_train_loss = 0.0;
  double final_test_metric = 0.0;
  std::optional<double> final_epsilon;
  std::vector<double> final_params;
  std::vector<MomentSnapshot> snapshots;  // diagnostics mode only
};

// Runs training per config, writing manifest.json, records.csv and
// summary.json under out_dir. Identical config and seeds produce
// byte-identical records.csv. Empty out_dir skips all file output.
RunResult run(const ExperimentConfig& config, const std::string& out_dir);

// DP-Adam vs DP-SGDM on the converted learning-rate schedule (same data,
// sampling and noise streams), plus the forced-denominator identity check
// where DP-Adam's denominator is pinned to sqrt(Phi).
struct SgdmEquivalenceReport {
  double max_rel_param_dev_forced = 0.0;  // over all steps
  double loss_mse = 0.0;                  // per-step train-loss MSE, live runs
  double final_loss_adam = 0.0;
  double final_loss_sgdm = 0.0;
  double phi = 0.0;
  double eta_sgdm_limit = 0.0;
};
SgdmEquivalenceReport experiment_sgdm_equivalence(const ExperimentConfig& config,
                                                  const std::string& out_dir);

// One DP-AdamBC-style run per Phi' (SUBTRACT mode when sigma > 0, ADD mode
// otherwise), n_seeds noise seeds each, medians of the final train loss.
struct PhiAblationRow {
  double phi_prime = 0.0;
  double median_final_loss = 0.0;
  std::vector<double> final_losses;
};
struct PhiAblationReport {
  double phi = 0.0;
  std::vector<PhiAblationRow> rows;
  bool true_phi_matches_adambc = false;  // bit-identical record check
};
PhiAblationReport experiment_phi_ablation(const ExperimentConfig& config,
                                          const std::vector<double>& phi_grid,
                                          int n_seeds,
                                          const std::string& out_dir);

enum class SweepKind { kGamma, kGammaPrime, kBetas };
SweepKind parse_sweep_kind(const std::string& name);

struct SweepRow {
  double value = 0.0;   // gamma / gamma_prime / beta1
  double value2 = 0.0;  // beta2 for the betas sweep
  double final_loss = 0.0;
  double final_test_metric = 0.0;
};
struct SweepReport {
  SweepKind kind = SweepKind::kGamma;
  std::vector<SweepRow> rows;
};
// Betas sweep enforces (1 - beta1) = sqrt(1 - beta2): grid entries are
// beta1 values and beta2 = 1 - (1 - beta1)^2.
SweepReport experiment_sweeps(const ExperimentConfig& config, SweepKind kind,
                              const std::vector<double>& grid,
                              const std::string& out_dir);

}  // namespace dpopt

#endif  // DPOPT_HARNESS_HPP_
