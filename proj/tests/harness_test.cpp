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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpopt/accountant.hpp"
#include "dpopt/error.hpp"
#include "dpopt/harness.hpp"

using namespace dpopt;
namespace fs = std::filesystem;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.dataset = {TaskKind::kRegression, 200, 8};
  c.model.kind = ModelKind::kLinearRegression;
  c.optimizer.kind = OptimizerKind::kDpSgd;
  c.optimizer.eta = 0.05;
  c.privacy.clip_norm = 1.0;
  c.privacy.noise_multiplier = 1.0;
  c.privacy.expected_batch = 50;
  c.privacy.dataset_size = 200;
  c.privacy.target_epsilon = 8.0;
  c.privacy.target_delta = 1e-5;
  c.steps = 40;
  c.eval_every = 10;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dpopt_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config JSON round trip and strictness") {
  SUBCASE("round trip") {
    ExperimentConfig c = base_config();
    c.optimizer.kind = OptimizerKind::kDpAdamBC;
    c.diagnostics = true;
    const ExperimentConfig back = config_from_json_text(config_to_json_text(c));
    CHECK(back.optimizer.kind == c.optimizer.kind);
    CHECK(back.dataset.n == c.dataset.n);
    CHECK(back.privacy.expected_batch == c.privacy.expected_batch);
    CHECK(back.diagnostics == c.diagnostics);
    CHECK(back.steps == c.steps);
  }
  SUBCASE("unknown keys are rejected") {
    std::string text = config_to_json_text(base_config());
    text.insert(text.rfind('}'), R"(, "learning_rate": 0.1)");
    CHECK_THROWS_AS(config_from_json_text(text), ConfigError);
  }
  SUBCASE("unknown nested keys are rejected") {
    ExperimentConfig c = base_config();
    std::string text = config_to_json_text(c);
    const auto pos = text.find("\"eta\"");
    std::string bad = text;
    bad.replace(pos, 5, "\"etaa\"");
    CHECK_THROWS_AS(config_from_json_text(bad), ConfigError);
  }
  SUBCASE("steps and epsilon budget are mutually exclusive") {
    ExperimentConfig c = base_config();
    c.use_epsilon_budget = true;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.steps.reset();
    c.use_epsilon_budget = false;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("dataset_size must match n") {
    ExperimentConfig c = base_config();
    c.privacy.dataset_size = 100;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("epsilon budget requires poisson") {
    ExperimentConfig c = base_config();
    c.steps.reset();
    c.use_epsilon_budget = true;
    c.sampling = SamplingMode::kFixedBatch;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_CASE("runs are byte-identical for identical config and seeds") {
  const fs::path d1 = temp_dir("det1"), d2 = temp_dir("det2");
  const ExperimentConfig c = base_config();
  run(c, d1.string());
  run(c, d2.string());
  CHECK(slurp(d1 / "records.csv") == slurp(d2 / "records.csv"));
  CHECK(slurp(d1 / "records.csv").size() > 0);
  ExperimentConfig c2 = base_config();
  c2.seeds.noise = 99;
  const fs::path d3 = temp_dir("det3");
  run(c2, d3.string());
  CHECK(slurp(d1 / "records.csv") != slurp(d3 / "records.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("sigma=0 matches a hand-rolled clipped-gradient run") {
  ExperimentConfig c = base_config();
  c.privacy.noise_multiplier = 0.0;
  c.steps = 25;
  const RunResult r = run(c, "");

  // replay: same sampling stream, clip, nominal-B average, plain SGD
  const Dataset train = make_synthetic(c.dataset.task, c.dataset.n, c.dataset.p,
                                       c.seeds.data);
  Model model = make_model(ModelKind::kLinearRegression, {c.dataset.p});
  for (std::int64_t t = 1; t <= 25; ++t) {
    StepRng srng(c.seeds.noise, Stream::kSampling, static_cast<std::uint64_t>(t));
    const auto idx = poisson_sample(train.n_examples(), c.privacy.sampling_q(), srng);
    const PerExampleGrads g = per_example_grads(model, train, idx);
    std::vector<double> acc(model.dim(), 0.0);
    for (std::size_t row = 0; row < g.grads.rows; ++row) {
      std::vector<double> gr(g.grads.row(row), g.grads.row(row) + model.dim());
      gr = clip(std::move(gr), c.privacy.clip_norm);
      for (std::size_t j = 0; j < model.dim(); ++j) acc[j] += gr[j];
    }
    for (std::size_t j = 0; j < model.dim(); ++j)
      model.params[j] -= c.optimizer.eta * acc[j] / 50.0;
  }
  for (std::size_t j = 0; j < model.dim(); ++j)
    CHECK(r.final_params[j] == doctest::Approx(model.params[j]).epsilon(1e-12));
}

TEST_CASE("quadratic task under DP-SGD decreases smoothed loss") {
  ExperimentConfig c = base_config();
  c.dataset = {TaskKind::kRegression, 400, 6};
  c.privacy.dataset_size = 400;
  c.privacy.expected_batch = 100;
  c.privacy.clip_norm = 2.0;
  c.privacy.noise_multiplier = 0.3;
  c.optimizer.eta = 0.02;
  c.steps = 300;
  c.eval_every = 10;
  const RunResult r = run(c, "");
  // window-of-3 averages of the recorded losses must trend down
  const auto& rec = r.records;
  REQUIRE(rec.size() >= 9);
  auto window = [&](std::size_t i) {
    return (rec[i].train_loss + rec[i + 1].train_loss + rec[i + 2].train_loss) / 3.0;
  };
  CHECK(window(rec.size() - 3) < window(0));
  int drops = 0, total = 0;
  for (std::size_t i = 0; i + 5 < rec.size(); ++i) {
    total += 1;
    drops += window(i + 3) <= window(i) ? 1 : 0;
  }
  CHECK(drops >= total * 8 / 10);
}

TEST_CASE("epsilon accounting in records") {
  SUBCASE("poisson: epsilon is present and non-decreasing") {
    ExperimentConfig c = base_config();
    c.steps = 60;
    c.eval_every = 15;
    const RunResult r = run(c, "");
    double prev = 0.0;
    for (const auto& rec : r.records) {
      REQUIRE(rec.epsilon_spent.has_value());
      CHECK(*rec.epsilon_spent >= prev);
      prev = *rec.epsilon_spent;
    }
  }
  SUBCASE("fixed-batch: no epsilon is reported") {
    ExperimentConfig c = base_config();
    c.sampling = SamplingMode::kFixedBatch;
    const RunResult r = run(c, "");
    for (const auto& rec : r.records) CHECK(!rec.epsilon_spent.has_value());
  }
  SUBCASE("epsilon budget stops at the calibrated step count") {
    ExperimentConfig c = base_config();
    c.steps.reset();
    c.use_epsilon_budget = true;
    c.privacy.expected_batch = 20;  // q = 0.1 keeps a single step feasible
    c.privacy.target_epsilon = 4.0;
    const RunResult r = run(c, "");
    CHECK(r.steps_run == calibrate_steps(c.privacy));
    REQUIRE(r.final_epsilon.has_value());
    CHECK(*r.final_epsilon <= 4.0);
  }
}

TEST_CASE("NaN loss aborts with a diagnostic dump") {
  ExperimentConfig c = base_config();
  c.optimizer.eta = 1e160;  // overflows the loss at the first eval
  c.privacy.noise_multiplier = 0.0;
  c.diagnostics = true;
  c.steps = 50;
  c.eval_every = 1;
  const fs::path d = temp_dir("nan");
  CHECK_THROWS_AS(run(c, d.string()), RunAborted);
  CHECK(fs::exists(d / "moment_dump.csv"));
  fs::remove_all(d);
}

TEST_CASE("manifest and summary files") {
  const fs::path d = temp_dir("files");
  ExperimentConfig c = base_config();
  c.diagnostics = true;
  run(c, d.string());
  CHECK(fs::exists(d / "manifest.json"));
  CHECK(fs::exists(d / "records.csv"));
  CHECK(fs::exists(d / "summary.json"));
  CHECK(fs::exists(d / "snapshots.csv"));
  const std::string manifest = slurp(d / "manifest.json");
  CHECK(manifest.find("\"phi\"") != std::string::npos);
  CHECK(manifest.find("\"seeds\"") != std::string::npos);
  CHECK(manifest.find(kVersion) != std::string::npos);
  const std::string records = slurp(d / "records.csv");
  CHECK(records.rfind("step,train_loss,test_metric,epsilon_spent,grad_norm_mean", 0) == 0);
  fs::remove_all(d);
}

TEST_CASE("sgdm equivalence experiment") {
  ExperimentConfig c = base_config();
  c.optimizer.kind = OptimizerKind::kDpAdam;
  c.optimizer.eta = 0.001;
  c.optimizer.beta1 = 0.9;
  c.privacy.clip_norm = 0.1;
  c.privacy.noise_multiplier = 0.4;
  c.steps = 60;
  const SgdmEquivalenceReport rep = experiment_sgdm_equivalence(c, "");
  CHECK(rep.max_rel_param_dev_forced < 1e-12);
  CHECK(rep.loss_mse >= 0.0);
  CHECK(rep.eta_sgdm_limit ==
        doctest::Approx(convert_lr(0.001, 0.9, Phi{rep.phi})).epsilon(1e-12));
  SUBCASE("requires Phi > 0") {
    ExperimentConfig c0 = c;
    c0.privacy.noise_multiplier = 0.0;
    CHECK_THROWS_AS(experiment_sgdm_equivalence(c0, ""), DomainError);
  }
}

TEST_CASE("phi ablation experiment") {
  ExperimentConfig c = base_config();
  c.dataset = {TaskKind::kSignDescentStress, 200, 20};
  c.privacy.dataset_size = 200;
  c.privacy.expected_batch = 50;
  c.privacy.clip_norm = 0.02;
  c.privacy.noise_multiplier = 2.0;
  c.optimizer.kind = OptimizerKind::kDpAdamBC;
  c.optimizer.eta = 0.001;
  c.optimizer.gamma_prime = 1e-10;
  c.steps = 80;
  const double phi = compute_phi(c.privacy).value;
  const PhiAblationReport rep =
      experiment_phi_ablation(c, {phi, 10.0 * phi, 0.1 * phi}, 2, "");
  CHECK(rep.rows.size() == 3);
  CHECK(rep.true_phi_matches_adambc);
  for (const auto& row : rep.rows) CHECK(row.final_losses.size() == 2);
  SUBCASE("grid must contain the true Phi") {
    CHECK_THROWS_AS(experiment_phi_ablation(c, {10.0 * phi}, 2, ""), ConfigError);
  }
}

TEST_CASE("sweep experiments") {
  ExperimentConfig c = base_config();
  c.optimizer.kind = OptimizerKind::kDpAdam;
  c.optimizer.eta = 0.005;
  c.steps = 30;
  SUBCASE("betas sweep enforces the coupling") {
    const SweepReport rep =
        experiment_sweeps(c, SweepKind::kBetas, {0.8, 0.9, 0.99}, "");
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].value2 == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(rep.rows[1].value2 == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(rep.rows[2].value2 == doctest::Approx(0.9999).epsilon(1e-12));
  }
  SUBCASE("gamma sweep runs the grid") {
    const SweepReport rep =
        experiment_sweeps(c, SweepKind::kGamma, {1e-8, 1e-6}, "");
    CHECK(rep.rows.size() == 2);
    for (const auto& row : rep.rows) CHECK(std::isfinite(row.final_loss));
  }
}

TEST_CASE("Phi domination: equivalence is tighter in the large-Phi regime") {
  // Same stress task under the small-Phi (C=0.1, sigma=0.4) and large-Phi
  // (C=1.0, sigma=1.0) settings; when Phi dominates v_hat_p, DP-Adam tracks
  // the converted DP-SGDM more closely, so the loss-curve MSE shrinks.
  auto equivalence_mse = [](double C, double sigma, std::int64_t B) {
    ExperimentConfig c;
    c.dataset = {TaskKind::kSignDescentStress, 500, 20};
    c.model.kind = ModelKind::kLinearRegression;
    c.optimizer.kind = OptimizerKind::kDpAdam;
    c.optimizer.eta = 0.001;
    c.privacy.clip_norm = C;
    c.privacy.noise_multiplier = sigma;
    c.privacy.expected_batch = B;
    c.privacy.dataset_size = 500;
    c.privacy.target_epsilon = 50.0;
    c.privacy.target_delta = 1e-5;
    c.steps = 300;
    c.eval_every = 10;
    c.seeds = {5, 6, 7};
    return experiment_sgdm_equivalence(c, "").loss_mse;
  };
  const double mse_small = equivalence_mse(0.1, 0.4, 128);
  const double mse_large = equivalence_mse(1.0, 1.0, 256);
  CHECK(std::isfinite(mse_small));
  CHECK(mse_large < mse_small);
}

TEST_CASE("ADD mode with huge Phi' reduces to converted DP-SGDM") {
  // sigma = 0 run; denominator sqrt(v_hat + Phi') is dominated by Phi', so
  // the trajectory matches DP-SGDM under the converted schedule.
  const double phi_prime = 1e6;
  ExperimentConfig fake = base_config();
  fake.dataset = {TaskKind::kSignDescentStress, 200, 10};
  fake.privacy.dataset_size = 200;
  fake.privacy.expected_batch = 50;
  fake.privacy.clip_norm = 0.02;
  fake.privacy.noise_multiplier = 0.0;
  fake.optimizer.kind = OptimizerKind::kDpAdamFakePhi;
  fake.optimizer.eta = 0.5;
  fake.optimizer.phi_override = phi_prime;
  fake.optimizer.phi_mode = FakePhiMode::kAdd;
  fake.steps = 200;
  ExperimentConfig sgdm = fake;
  sgdm.optimizer.kind = OptimizerKind::kDpSgdm;
  sgdm.optimizer.phi_override.reset();
  sgdm.optimizer.momentum_beta = fake.optimizer.beta1;
  sgdm.optimizer.lr_schedule.clear();
  for (std::int64_t t = 1; t <= 200; ++t)
    sgdm.optimizer.lr_schedule.push_back(
        convert_lr(1.0, fake.optimizer.beta1, Phi{phi_prime}, t));
  const RunResult rf = run(fake, "");
  const RunResult rs = run(sgdm, "");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < rf.final_params.size(); ++j) {
    num = std::max(num, std::fabs(rf.final_params[j] - rs.final_params[j]));
    den = std::max(den, std::fabs(rf.final_params[j]));
  }
  CHECK(num / std::max(den, 1e-300) < 1e-10);
}

TEST_CASE("no gamma makes DP-Adam reach the corrected stationary scale") {
  // Stationary closed forms: with signal sqrt(10 Phi) and DP noise variance
  // Phi, DP-Adam's |update| is at most sqrt(10/11) for every gamma, while
  // DP-AdamBC's approaches 1.
  const double phi = 2.44140625e-8;
  const double signal = std::sqrt(10.0 * phi);
  const double limit_adam_gamma0 = signal / std::sqrt(signal * signal + phi);
  for (double gamma : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
    const double delta = signal / (std::sqrt(signal * signal + phi) + gamma);
    CHECK(delta <= limit_adam_gamma0);
    CHECK(delta < 0.96);
  }
  const double delta_bc = signal / std::sqrt(std::max(signal * signal, 1e-10));
  CHECK(delta_bc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("max-clause saturation: co-scaled (gamma', eta) runs coincide") {
  // With gamma' floored everywhere, the DP-AdamBC update is eta m_hat /
  // sqrt(gamma'); scaling gamma' by 4 and eta by 2 leaves it unchanged.
  ExperimentConfig a = base_config();
  a.dataset = {TaskKind::kSignDescentStress, 100, 10};
  a.privacy.dataset_size = 100;
  a.privacy.expected_batch = 25;
  a.privacy.clip_norm = 0.02;
  a.privacy.noise_multiplier = 2.0;
  a.optimizer.kind = OptimizerKind::kDpAdamBC;
  a.optimizer.eta = 0.001;
  a.optimizer.gamma_prime = 1.0;  // far above any observed v_hat - Phi
  a.steps = 40;
  ExperimentConfig b = a;
  b.optimizer.gamma_prime = 4.0;
  b.optimizer.eta = 0.002;
  const RunResult ra = run(a, "");
  const RunResult rb = run(b, "");
  CHECK(ra.final_params == rb.final_params);
}

TEST_CASE("account config loader") {
  const fs::path p = fs::temp_directory_path() / "dpopt_account_test.json";
  {
    std::ofstream out(p);
    out << R"({"privacy": {"clip_norm": 0.1, "noise_multiplier": 0.4,
                "expected_batch": 256, "dataset_size": 550000,
                "target_epsilon": 7.0, "target_delta": 1e-5}, "steps": 100})";
  }
  const AccountConfig cfg = load_account_config(p.string());
  CHECK(cfg.privacy.expected_batch == 256);
  CHECK(cfg.steps == 100);
  fs::remove(p);
}
