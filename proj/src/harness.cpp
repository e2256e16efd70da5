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

#include "dpopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dpopt/accountant.hpp"
#include "dpopt/csvio.hpp"
#include "dpopt/error.hpp"

namespace dpopt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + context);
  }
}

DatasetSpec dataset_from_json(const json& j) {
  check_keys(j, {"task", "n", "p"}, "dataset");
  DatasetSpec d;
  d.task = parse_task(j.at("task").get<std::string>());
  d.n = j.at("n").get<std::size_t>();
  d.p = j.at("p").get<std::size_t>();
  return d;
}

ModelSpec model_from_json(const json& j) {
  check_keys(j, {"kind", "hidden"}, "model");
  ModelSpec m;
  m.kind = parse_model_kind(j.at("kind").get<std::string>());
  if (j.contains("hidden"))
    for (const auto& h : j.at("hidden")) m.hidden.push_back(h.get<std::size_t>());
  if (m.kind != ModelKind::kMlp && !m.hidden.empty())
    throw ConfigError("hidden layers are only valid for mlp");
  return m;
}

OptimizerConfig optimizer_from_json(const json& j) {
  check_keys(j,
             {"kind", "eta", "beta1", "beta2", "gamma", "gamma_prime",
              "momentum_beta", "phi_override", "phi_override_mode"},
             "optimizer");
  OptimizerConfig c;
  c.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
  c.eta = j.at("eta").get<double>();
  if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("gamma_prime")) c.gamma_prime = j.at("gamma_prime").get<double>();
  if (j.contains("momentum_beta")) c.momentum_beta = j.at("momentum_beta").get<double>();
  if (j.contains("phi_override")) c.phi_override = j.at("phi_override").get<double>();
  if (j.contains("phi_override_mode")) {
    const auto mode = j.at("phi_override_mode").get<std::string>();
    if (mode == "subtract")
      c.phi_mode = FakePhiMode::kSubtract;
    else if (mode == "add")
      c.phi_mode = FakePhiMode::kAdd;
    else
      throw ConfigError("phi_override_mode must be 'subtract' or 'add'");
  }
  return c;
}

PrivacySpec privacy_from_json(const json& j) {
  check_keys(j,
             {"clip_norm", "noise_multiplier", "expected_batch", "dataset_size",
              "target_epsilon", "target_delta"},
             "privacy");
  PrivacySpec p;
  p.clip_norm = j.at("clip_norm").get<double>();
  p.noise_multiplier = j.at("noise_multiplier").get<double>();
  p.expected_batch = j.at("expected_batch").get<std::int64_t>();
  p.dataset_size = j.at("dataset_size").get<std::int64_t>();
  p.target_epsilon = j.at("target_epsilon").get<double>();
  p.target_delta = j.at("target_delta").get<double>();
  return p;
}

SamplingMode sampling_from_string(const std::string& s) {
  if (s == "poisson") return SamplingMode::kPoisson;
  if (s == "fixed-batch") return SamplingMode::kFixedBatch;
  throw ConfigError("sampling must be 'poisson' or 'fixed-batch'");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"task", task_name(c.dataset.task)},
                  {"n", c.dataset.n},
                  {"p", c.dataset.p}};
  json jm;
  jm["kind"] = model_kind_name(c.model.kind);
  if (!c.model.hidden.empty()) jm["hidden"] = c.model.hidden;
  j["model"] = jm;
  json jo;
  jo["kind"] = optimizer_kind_name(c.optimizer.kind);
  jo["eta"] = c.optimizer.eta;
  jo["beta1"] = c.optimizer.beta1;
  jo["beta2"] = c.optimizer.beta2;
  jo["gamma"] = c.optimizer.gamma;
  jo["gamma_prime"] = c.optimizer.gamma_prime;
  jo["momentum_beta"] = c.optimizer.momentum_beta;
  if (c.optimizer.phi_override) {
    jo["phi_override"] = *c.optimizer.phi_override;
    jo["phi_override_mode"] =
        c.optimizer.phi_mode == FakePhiMode::kSubtract ? "subtract" : "add";
  }
  j["optimizer"] = jo;
  j["privacy"] = {{"clip_norm", c.privacy.clip_norm},
                  {"noise_multiplier", c.privacy.noise_multiplier},
                  {"expected_batch", c.privacy.expected_batch},
                  {"dataset_size", c.privacy.dataset_size},
                  {"target_epsilon", c.privacy.target_epsilon},
                  {"target_delta", c.privacy.target_delta}};
  if (c.steps) j["steps"] = *c.steps;
  if (c.use_epsilon_budget) j["use_epsilon_budget"] = true;
  j["eval_every"] = c.eval_every;
  j["diagnostics"] = c.diagnostics;
  j["sampling"] = c.sampling == SamplingMode::kPoisson ? "poisson" : "fixed-batch";
  j["init_scale"] = c.init_scale;
  j["seeds"] = {{"data", c.seeds.data}, {"noise", c.seeds.noise}, {"init", c.seeds.init}};
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  optimizer.validate();
  privacy.validate();
  if (dataset.n < 1 || dataset.p < 1) throw ConfigError("dataset needs n,p >= 1");
  if (steps.has_value() == use_epsilon_budget)
    throw ConfigError("set exactly one of steps / use_epsilon_budget");
  if (steps && *steps < 1) throw ConfigError("steps must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (static_cast<std::size_t>(privacy.dataset_size) != dataset.n)
    throw ConfigError("privacy.dataset_size must equal dataset.n");
  if (use_epsilon_budget && sampling == SamplingMode::kFixedBatch)
    throw ConfigError("epsilon budget requires poisson sampling");
  if (model.kind == ModelKind::kMlp && model.hidden.empty())
    throw ConfigError("mlp needs hidden layer widths");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  check_keys(j,
             {"dataset", "model", "optimizer", "privacy", "steps",
              "use_epsilon_budget", "eval_every", "diagnostics", "sampling",
              "init_scale", "seeds"},
             "config");
  ExperimentConfig c;
  try {
    c.dataset = dataset_from_json(j.at("dataset"));
    c.model = model_from_json(j.at("model"));
    c.optimizer = optimizer_from_json(j.at("optimizer"));
    c.privacy = privacy_from_json(j.at("privacy"));
    if (j.contains("steps")) c.steps = j.at("steps").get<std::int64_t>();
    if (j.contains("use_epsilon_budget"))
      c.use_epsilon_budget = j.at("use_epsilon_budget").get<bool>();
    if (j.contains("eval_every")) c.eval_every = j.at("eval_every").get<std::int64_t>();
    if (j.contains("diagnostics")) c.diagnostics = j.at("diagnostics").get<bool>();
    if (j.contains("sampling"))
      c.sampling = sampling_from_string(j.at("sampling").get<std::string>());
    if (j.contains("init_scale")) c.init_scale = j.at("init_scale").get<double>();
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      check_keys(s, {"data", "noise", "init"}, "seeds");
      c.seeds.data = s.at("data").get<std::uint64_t>();
      c.seeds.noise = s.at("noise").get<std::uint64_t>();
      c.seeds.init = s.at("init").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& config) {
  return config_to_json(config).dump(2);
}

AccountConfig load_account_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  AccountConfig out;
  if (j.contains("dataset")) {
    const ExperimentConfig full = config_from_json_text(ss.str());
    out.privacy = full.privacy;
    out.steps = full.steps;
    out.sampling = full.sampling;
    return out;
  }
  check_keys(j, {"privacy", "steps", "sampling"}, "account config");
  try {
    out.privacy = privacy_from_json(j.at("privacy"));
    out.privacy.validate();
    if (j.contains("steps")) out.steps = j.at("steps").get<std::int64_t>();
    if (j.contains("sampling"))
      out.sampling = sampling_from_string(j.at("sampling").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return out;
}

namespace {

constexpr std::uint64_t kTestSeedSalt = 0x517cc1b727220a95ULL;

Dataset build_test_set(const ExperimentConfig& c) {
  const std::size_t n_test = c.dataset.task == TaskKind::kSignDescentStress
                                 ? c.dataset.n
                                 : std::max<std::size_t>(c.dataset.n / 5, 32);
  return make_synthetic(c.dataset.task, n_test, c.dataset.p,
                        c.seeds.data ^ kTestSeedSalt);
}

Model build_model(const ExperimentConfig& c, const Dataset& train) {
  std::vector<std::size_t> layers{c.dataset.p};
  if (c.model.kind == ModelKind::kMlp) {
    for (std::size_t h : c.model.hidden) layers.push_back(h);
    layers.push_back(static_cast<std::size_t>(std::max(train.n_classes, 2)));
  }
  Model m = make_model(c.model.kind, layers);
  double scale = c.init_scale;
  if (scale == 0.0 && c.model.kind == ModelKind::kMlp) scale = 0.5;
  init_params(m, c.seeds.init, scale);
  return m;
}

double test_metric(const Model& model, const Dataset& test) {
  if (test.classification && model.kind != ModelKind::kLinearRegression)
    return accuracy_full(model, test);
  return loss_full(model, test);
}

double mean_row_norm(const PerExampleGrads& g) {
  if (g.grads.rows == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < g.grads.rows; ++r) {
    double sq = 0.0;
    const double* row = g.grads.row(r);
    for (std::size_t j = 0; j < g.grads.cols; ++j) sq += row[j] * row[j];
    acc += std::sqrt(sq);
  }
  return acc / static_cast<double>(g.grads.rows);
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void write_records_csv(const std::vector<StepRecord>& records, bool diagnostics,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path);
  CsvWriter w(out);
  std::vector<std::string> header = {"step", "train_loss", "test_metric",
                                     "epsilon_spent", "grad_norm_mean"};
  if (diagnostics) {
    header.insert(header.end(), {"m_hat_p_mean", "v_hat_p_mean", "v_hat_c_mean",
                                 "v_hat_corr_mean"});
  }
  w.row(header);
  for (const auto& r : records) {
    std::vector<std::string> cells = {
        std::to_string(r.step), format_double(r.train_loss),
        format_double(r.test_metric),
        r.epsilon_spent ? format_double(*r.epsilon_spent) : std::string(),
        format_double(r.grad_norm_mean)};
    if (diagnostics) {
      auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
      };
      cells.push_back(opt(r.m_hat_p_mean));
      cells.push_back(opt(r.v_hat_p_mean));
      cells.push_back(opt(r.v_hat_c_mean));
      cells.push_back(opt(r.v_hat_corr_mean));
    }
    w.row(cells);
  }
}

void dump_snapshot(const MomentSnapshot& snap, const std::string& path) {
  std::vector<MomentSnapshot> one{snap};
  write_snapshot_csv(one, path);
}

}  // namespace

RunResult run(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  const bool to_disk = !out_dir.empty();
  if (to_disk) fs::create_directories(out_dir);

  const Dataset train = make_synthetic(config.dataset.task, config.dataset.n,
                                       config.dataset.p, config.seeds.data);
  const Dataset test = build_test_set(config);
  Model model = build_model(config, train);
  const Phi phi = compute_phi(config.privacy);
  const double q = config.privacy.sampling_q();

  std::optional<RdpCurve> one_step;
  if (config.sampling == SamplingMode::kPoisson &&
      config.privacy.noise_multiplier > 0.0) {
    one_step = single_step_curve(q, config.privacy.noise_multiplier);
  } else if (config.sampling == SamplingMode::kFixedBatch) {
    std::cerr << "accounting invalid for fixed-batch mode\n";
  }

  std::int64_t total_steps = 0;
  if (config.steps) {
    total_steps = *config.steps;
  } else {
    total_steps = calibrate_steps(config.privacy);  // largest T within budget
  }

  MomentState state(model.dim());
  std::optional<MomentChannels> channels;
  if (config.diagnostics) {
    channels.emplace(model.dim(),
                     ChannelConfig{config.optimizer.beta1, config.optimizer.beta2,
                                   config.optimizer.gamma_prime, phi.value});
  }

  RunResult result;
  result.out_dir = out_dir;
  result.phi = phi.value;

  auto epsilon_at = [&](std::int64_t t) -> std::optional<double> {
    if (!one_step) return std::nullopt;
    return to_epsilon_delta(compose(*one_step, t), config.privacy.target_delta)
        .epsilon;
  };

  auto record_at = [&](std::int64_t t, double grad_norm) {
    StepRecord rec;
    rec.step = t;
    rec.train_loss = loss_full(model, train);
    rec.test_metric = test_metric(model, test);
    rec.epsilon_spent = epsilon_at(t);
    rec.grad_norm_mean = grad_norm;
    if (channels) {
      const MomentSnapshot snap = channels->snapshot();
      rec.m_hat_p_mean = mean(snap.m_hat_p);
      rec.v_hat_p_mean = mean(snap.v_hat_p);
      rec.v_hat_c_mean = mean(snap.v_hat_c);
      rec.v_hat_corr_mean = mean(snap.v_hat_corr);
      result.snapshots.push_back(snap);
    }
    result.records.push_back(rec);
    return rec.train_loss;
  };

  auto abort_run = [&](std::int64_t t, const std::string& why) {
    if (to_disk) {
      if (channels)
        dump_snapshot(channels->snapshot(), (fs::path(out_dir) / "moment_dump.csv").string());
      write_records_csv(result.records, config.diagnostics,
                        (fs::path(out_dir) / "records.csv").string());
    }
    throw RunAborted("run aborted at step " + std::to_string(t) + ": " + why);
  };

  for (std::int64_t t = 1; t <= total_steps; ++t) {
    StepRng sample_rng(config.seeds.noise, Stream::kSampling,
                       static_cast<std::uint64_t>(t));
    std::vector<std::size_t> idx;
    if (config.sampling == SamplingMode::kPoisson) {
      idx = poisson_sample(train.n_examples(), q, sample_rng);
    } else {
      idx = fixed_batch_sample(train.n_examples(),
                               static_cast<std::size_t>(config.privacy.expected_batch),
                               sample_rng);
    }
    const PerExampleGrads grads = per_example_grads(model, train, idx);
    StepRng noise_rng(config.seeds.noise, Stream::kNoise,
                      static_cast<std::uint64_t>(t));
    const PrivateGradient pg =
        privatize(grads, config.privacy, noise_rng, t, config.diagnostics);
    if (channels) channels->advance(pg.g_bar, pg.noise);
    step(model.params, state, pg.g_tilde, config.optimizer, phi);
    if (!all_finite(model.params)) abort_run(t, "non-finite parameters");

    if (t % config.eval_every == 0 || t == total_steps) {
      const double tl = record_at(t, mean_row_norm(grads));
      if (!std::isfinite(tl)) abort_run(t, "NaN loss");
    }
  }

  result.steps_run = total_steps;
  result.final_train_loss = result.records.empty() ? loss_full(model, train)
                                                   : result.records.back().train_loss;
  result.final_test_metric = result.records.empty() ? test_metric(model, test)
                                                    : result.records.back().test_metric;
  result.final_epsilon = epsilon_at(total_steps);
  result.final_params = model.params;

  if (to_disk) {
    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = json::parse(config_to_json_text(config));
    manifest["phi"] = format_double(phi.value);
    manifest["steps_run"] = total_steps;
    manifest["sampling_q"] = format_double(q);
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";

    write_records_csv(result.records, config.diagnostics,
                      (fs::path(out_dir) / "records.csv").string());

    json summary;
    summary["final_train_loss"] = format_double(result.final_train_loss);
    summary["final_test_metric"] = format_double(result.final_test_metric);
    if (result.final_epsilon)
      summary["final_epsilon"] = format_double(*result.final_epsilon);
    summary["steps_run"] = total_steps;
    std::ofstream sf(fs::path(out_dir) / "summary.json");
    sf << summary.dump(2) << "\n";

    if (!result.snapshots.empty())
      write_snapshot_csv(result.snapshots,
                         (fs::path(out_dir) / "snapshots.csv").string());
  }
  return result;
}

SgdmEquivalenceReport experiment_sgdm_equivalence(const ExperimentConfig& config,
                                                  const std::string& out_dir) {
  config.validate();
  const Phi phi = compute_phi(config.privacy);
  if (!(phi.value > 0.0))
    throw DomainError("sgdm equivalence needs Phi > 0 (sigma > 0)");
  if (!config.steps) throw ConfigError("sgdm equivalence needs explicit steps");
  const std::int64_t T = *config.steps;
  const double beta = config.optimizer.beta1;
  const double eta_adam = config.optimizer.eta;

  // Live runs: DP-Adam vs DP-SGDM with the converted schedule, shared streams.
  ExperimentConfig adam_cfg = config;
  adam_cfg.optimizer.kind = OptimizerKind::kDpAdam;
  adam_cfg.eval_every = 1;
  ExperimentConfig sgdm_cfg = config;
  sgdm_cfg.optimizer.kind = OptimizerKind::kDpSgdm;
  sgdm_cfg.optimizer.momentum_beta = beta;
  sgdm_cfg.optimizer.eta = eta_adam;
  sgdm_cfg.optimizer.lr_schedule.clear();
  for (std::int64_t t = 1; t <= T; ++t)
    sgdm_cfg.optimizer.lr_schedule.push_back(convert_lr(1.0, beta, phi, t));
  sgdm_cfg.eval_every = 1;

  const bool to_disk = !out_dir.empty();
  const RunResult adam_res =
      run(adam_cfg, to_disk ? (fs::path(out_dir) / "dp_adam").string() : "");
  const RunResult sgdm_res =
      run(sgdm_cfg, to_disk ? (fs::path(out_dir) / "dp_sgdm").string() : "");

  SgdmEquivalenceReport rep;
  rep.phi = phi.value;
  rep.eta_sgdm_limit = convert_lr(eta_adam, beta, phi);
  rep.final_loss_adam = adam_res.final_train_loss;
  rep.final_loss_sgdm = sgdm_res.final_train_loss;
  double mse = 0.0;
  const std::size_t n_rec = std::min(adam_res.records.size(), sgdm_res.records.size());
  for (std::size_t i = 0; i < n_rec; ++i) {
    const double d = adam_res.records[i].train_loss - sgdm_res.records[i].train_loss;
    mse += d * d;
  }
  rep.loss_mse = n_rec ? mse / static_cast<double>(n_rec) : 0.0;

  // Forced-denominator identity: DP-Adam with denominator sqrt(Phi) against
  // DP-SGDM on the schedule, sharing every stream. Algebraically
  // eta m_hat_t / sqrt(Phi) = eta_t b_t, so the trajectories coincide.
  const Dataset train = make_synthetic(config.dataset.task, config.dataset.n,
                                       config.dataset.p, config.seeds.data);
  Model forced_model = build_model(config, train);
  Model sgdm_model = build_model(config, train);
  std::vector<double> m_buf(forced_model.dim(), 0.0);
  MomentState sgdm_state(sgdm_model.dim());
  const double root_phi = std::sqrt(phi.value);
  double max_rel_dev = 0.0;
  for (std::int64_t t = 1; t <= T; ++t) {
    auto g_for = [&](Model& mdl) {
      StepRng sample_rng(config.seeds.noise, Stream::kSampling,
                         static_cast<std::uint64_t>(t));
      std::vector<std::size_t> idx =
          config.sampling == SamplingMode::kPoisson
              ? poisson_sample(train.n_examples(), config.privacy.sampling_q(),
                               sample_rng)
              : fixed_batch_sample(
                    train.n_examples(),
                    static_cast<std::size_t>(config.privacy.expected_batch),
                    sample_rng);
      const PerExampleGrads grads = per_example_grads(mdl, train, idx);
      StepRng noise_rng(config.seeds.noise, Stream::kNoise,
                        static_cast<std::uint64_t>(t));
      return privatize(grads, config.privacy, noise_rng, t, false).g_tilde;
    };
    {
      const std::vector<double> g = g_for(forced_model);
      const double bc1 = 1.0 - std::pow(beta, static_cast<double>(t));
      for (std::size_t j = 0; j < forced_model.dim(); ++j) {
        m_buf[j] = beta * m_buf[j] + (1.0 - beta) * g[j];
        forced_model.params[j] -= eta_adam * (m_buf[j] / bc1) / root_phi;
      }
    }
    {
      const std::vector<double> g = g_for(sgdm_model);
      step_dp_sgdm(sgdm_model.params, sgdm_state, g, sgdm_cfg.optimizer);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < forced_model.dim(); ++j) {
      num = std::max(num, std::fabs(forced_model.params[j] - sgdm_model.params[j]));
      den = std::max(den, std::fabs(forced_model.params[j]));
    }
    max_rel_dev = std::max(max_rel_dev, den > 0.0 ? num / den : num);
  }
  rep.max_rel_param_dev_forced = max_rel_dev;

  if (to_disk) {
    json j;
    j["version"] = kVersion;
    j["config"] = json::parse(config_to_json_text(config));
    j["phi"] = format_double(rep.phi);
    j["eta_sgdm_limit"] = format_double(rep.eta_sgdm_limit);
    j["loss_mse"] = format_double(rep.loss_mse);
    j["max_rel_param_dev_forced"] = format_double(rep.max_rel_param_dev_forced);
    j["final_loss_adam"] = format_double(rep.final_loss_adam);
    j["final_loss_sgdm"] = format_double(rep.final_loss_sgdm);
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << j.dump(2) << "\n";
  }
  return rep;
}

PhiAblationReport experiment_phi_ablation(const ExperimentConfig& config,
                                          const std::vector<double>& phi_grid,
                                          int n_seeds,
                                          const std::string& out_dir) {
  config.validate();
  if (n_seeds < 1) throw ConfigError("need n_seeds >= 1");
  const Phi phi = compute_phi(config.privacy);
  const bool noisy = config.privacy.noise_multiplier > 0.0;
  bool grid_has_phi = false;
  for (double pp : phi_grid)
    if (pp == phi.value) grid_has_phi = true;
  if (!grid_has_phi) throw ConfigError("phi grid must include the true Phi");

  PhiAblationReport rep;
  rep.phi = phi.value;
  const bool to_disk = !out_dir.empty();
  if (to_disk) fs::create_directories(out_dir);

  for (double phi_prime : phi_grid) {
    PhiAblationRow row;
    row.phi_prime = phi_prime;
    for (int s = 0; s < n_seeds; ++s) {
      ExperimentConfig c = config;
      c.optimizer.kind = OptimizerKind::kDpAdamFakePhi;
      c.optimizer.phi_override = phi_prime;
      c.optimizer.phi_mode = noisy ? FakePhiMode::kSubtract : FakePhiMode::kAdd;
      c.seeds.noise = config.seeds.noise + static_cast<std::uint64_t>(s);
      const RunResult r = run(c, "");
      row.final_losses.push_back(r.final_train_loss);
    }
    row.median_final_loss = quantile(row.final_losses, 0.5);
    rep.rows.push_back(row);
  }

  // SUBTRACT with the true Phi is the DP-AdamBC formula; check bit equality
  // of the full parameter vector on the base seed.
  if (noisy) {
    ExperimentConfig fake = config;
    fake.optimizer.kind = OptimizerKind::kDpAdamFakePhi;
    fake.optimizer.phi_override = phi.value;
    fake.optimizer.phi_mode = FakePhiMode::kSubtract;
    ExperimentConfig bc = config;
    bc.optimizer.kind = OptimizerKind::kDpAdamBC;
    bc.optimizer.phi_override.reset();
    const RunResult rf = run(fake, "");
    const RunResult rb = run(bc, "");
    rep.true_phi_matches_adambc = rf.final_params == rb.final_params;
  }

  if (to_disk) {
    std::ofstream csv(fs::path(out_dir) / "report.csv");
    CsvWriter w(csv);
    std::vector<std::string> header{"phi_prime", "median_final_loss"};
    for (int s = 0; s < n_seeds; ++s) header.push_back("loss_seed" + std::to_string(s));
    w.row(header);
    for (const auto& row : rep.rows) {
      std::vector<std::string> cells{format_double(row.phi_prime),
                                     format_double(row.median_final_loss)};
      for (double l : row.final_losses) cells.push_back(format_double(l));
      w.row(cells);
    }
    json j;
    j["version"] = kVersion;
    j["config"] = json::parse(config_to_json_text(config));
    j["phi"] = format_double(rep.phi);
    j["true_phi_matches_adambc"] = rep.true_phi_matches_adambc;
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << j.dump(2) << "\n";
  }
  return rep;
}

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "gamma") return SweepKind::kGamma;
  if (name == "gamma_prime") return SweepKind::kGammaPrime;
  if (name == "betas") return SweepKind::kBetas;
  throw ConfigError("unknown sweep '" + name + "'");
}

SweepReport experiment_sweeps(const ExperimentConfig& config, SweepKind kind,
                              const std::vector<double>& grid,
                              const std::string& out_dir) {
  config.validate();
  if (grid.empty()) throw ConfigError("empty sweep grid");
  SweepReport rep;
  rep.kind = kind;
  for (double v : grid) {
    ExperimentConfig c = config;
    SweepRow row;
    row.value = v;
    switch (kind) {
      case SweepKind::kGamma:
        c.optimizer.kind = OptimizerKind::kDpAdam;
        c.optimizer.gamma = v;
        break;
      case SweepKind::kGammaPrime:
        c.optimizer.kind = OptimizerKind::kDpAdamBC;
        c.optimizer.gamma_prime = v;
        break;
      case SweepKind::kBetas:
        // (1 - beta1) = sqrt(1 - beta2) coupling
        c.optimizer.beta1 = v;
        c.optimizer.beta2 = 1.0 - (1.0 - v) * (1.0 - v);
        row.value2 = c.optimizer.beta2;
        break;
    }
    const RunResult r = run(c, "");
    row.final_loss = r.final_train_loss;
    row.final_test_metric = r.final_test_metric;
    rep.rows.push_back(row);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "report.csv");
    CsvWriter w(csv);
    w.row({"value", "value2", "final_loss", "final_test_metric"});
    for (const auto& row : rep.rows)
      w.row({format_double(row.value), format_double(row.value2),
             format_double(row.final_loss), format_double(row.final_test_metric)});
    json j;
    j["version"] = kVersion;
    j["config"] = json::parse(config_to_json_text(config));
    j["phi"] = format_double(compute_phi(config.privacy).value);
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << j.dump(2) << "\n";
  }
  return rep;
}

}  // namespace dpopt
