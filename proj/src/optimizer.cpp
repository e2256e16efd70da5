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

#include "dpopt/optimizer.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "dpopt/csvio.hpp"
#include "dpopt/error.hpp"

namespace dpopt {

using nlohmann::json;

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "dp-sgd") return OptimizerKind::kDpSgd;
  if (name == "dp-sgdm") return OptimizerKind::kDpSgdm;
  if (name == "dp-adam") return OptimizerKind::kDpAdam;
  if (name == "dp-adambc") return OptimizerKind::kDpAdamBC;
  if (name == "dp-adam-fakephi") return OptimizerKind::kDpAdamFakePhi;
  throw ConfigError("unknown optimizer kind '" + name + "'");
}

std::string optimizer_kind_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kDpSgd: return "dp-sgd";
    case OptimizerKind::kDpSgdm: return "dp-sgdm";
    case OptimizerKind::kDpAdam: return "dp-adam";
    case OptimizerKind::kDpAdamBC: return "dp-adambc";
    case OptimizerKind::kDpAdamFakePhi: return "dp-adam-fakephi";
  }
  return "?";
}

Phi compute_phi(double sigma, double clip_norm, double batch) {
  const double per_coord = sigma * clip_norm / batch;
  return Phi{per_coord * per_coord};
}

Phi compute_phi(const PrivacySpec& spec) {
  spec.validate();
  return compute_phi(spec.noise_multiplier, spec.clip_norm,
                     static_cast<double>(spec.expected_batch));
}

void OptimizerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in [0,1)");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(gamma_prime > 0.0)) throw ConfigError("gamma_prime must be > 0");
  if (!(momentum_beta >= 0.0 && momentum_beta < 1.0))
    throw ConfigError("momentum_beta must be in [0,1)");
  if (phi_override.has_value()) {
    if (kind != OptimizerKind::kDpAdamFakePhi)
      throw ConfigError("phi_override is only legal for dp-adam-fakephi");
    if (!(*phi_override >= 0.0)) throw ConfigError("phi_override must be >= 0");
  }
  for (double s : lr_schedule)
    if (!(s > 0.0) || !std::isfinite(s))
      throw ConfigError("lr_schedule entries must be finite and > 0");
}

double OptimizerConfig::eta_at(std::int64_t t) const {
  if (lr_schedule.empty()) return eta;
  const std::size_t i =
      std::min<std::size_t>(static_cast<std::size_t>(t - 1), lr_schedule.size() - 1);
  return eta * lr_schedule[i];
}

namespace {

void check_grad(const std::vector<double>& g, const std::vector<double>& theta) {
  if (g.size() != theta.size()) throw ShapeError("gradient/parameter size mismatch");
  for (double v : g)
    if (!std::isfinite(v)) throw InputError("step rejected: non-finite gradient");
}

// Advances the EMAs and returns the post-increment step index.
std::int64_t advance_moments(MomentState& state, const std::vector<double>& g,
                             double beta1, double beta2) {
  if (state.m.size() != g.size()) throw ShapeError("state/gradient size mismatch");
  for (std::size_t j = 0; j < g.size(); ++j) {
    state.m[j] = beta1 * state.m[j] + (1.0 - beta1) * g[j];
    state.v[j] = beta2 * state.v[j] + (1.0 - beta2) * g[j] * g[j];
  }
  return ++state.t;
}

}  // namespace

void step_dp_sgd(std::vector<double>& theta, const std::vector<double>& g,
                 const OptimizerConfig& config, std::int64_t t) {
  check_grad(g, theta);
  const double eta_t = config.eta_at(t);
  for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= eta_t * g[j];
}

void step_dp_sgdm(std::vector<double>& theta, MomentState& state,
                  const std::vector<double>& g, const OptimizerConfig& config) {
  check_grad(g, theta);
  if (state.m.size() != g.size()) throw ShapeError("state/gradient size mismatch");
  const std::int64_t t = ++state.t;
  const double eta_t = config.eta_at(t);
  // b_t = beta b_{t-1} + g_t; the update descends.
  for (std::size_t j = 0; j < theta.size(); ++j) {
    state.m[j] = config.momentum_beta * state.m[j] + g[j];
    theta[j] -= eta_t * state.m[j];
  }
}

void step_dp_adam(std::vector<double>& theta, MomentState& state,
                  const std::vector<double>& g, const OptimizerConfig& config) {
  check_grad(g, theta);
  const std::int64_t t = advance_moments(state, g, config.beta1, config.beta2);
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  const double eta_t = config.eta_at(t);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double m_hat = state.m[j] / bc1;
    const double v_hat = state.v[j] / bc2;
    theta[j] -= eta_t * m_hat / (std::sqrt(v_hat) + config.gamma);
  }
}

void step_dp_adambc(std::vector<double>& theta, MomentState& state,
                    const std::vector<double>& g, const OptimizerConfig& config,
                    Phi phi) {
  check_grad(g, theta);
  if (!(phi.value >= 0.0)) throw InputError("phi must be >= 0");
  const std::int64_t t = advance_moments(state, g, config.beta1, config.beta2);
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  const double eta_t = config.eta_at(t);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double m_hat = state.m[j] / bc1;
    const double v_hat = state.v[j] / bc2;
    const double denom_sq = std::max(v_hat - phi.value, config.gamma_prime);
    theta[j] -= eta_t * m_hat / std::sqrt(denom_sq);
  }
}

void step_dp_adam_fakephi(std::vector<double>& theta, MomentState& state,
                          const std::vector<double>& g,
                          const OptimizerConfig& config) {
  if (!config.phi_override.has_value())
    throw ConfigError("dp-adam-fakephi requires phi_override");
  if (config.phi_mode == FakePhiMode::kSubtract) {
    step_dp_adambc(theta, state, g, config, Phi{*config.phi_override});
    return;
  }
  check_grad(g, theta);
  const std::int64_t t = advance_moments(state, g, config.beta1, config.beta2);
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  const double eta_t = config.eta_at(t);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double m_hat = state.m[j] / bc1;
    const double v_hat = state.v[j] / bc2;
    theta[j] -= eta_t * m_hat / std::sqrt(v_hat + *config.phi_override);
  }
}

void step(std::vector<double>& theta, MomentState& state,
          const std::vector<double>& g, const OptimizerConfig& config, Phi phi) {
  switch (config.kind) {
    case OptimizerKind::kDpSgd:
      step_dp_sgd(theta, g, config, ++state.t);
      return;
    case OptimizerKind::kDpSgdm:
      step_dp_sgdm(theta, state, g, config);
      return;
    case OptimizerKind::kDpAdam:
      step_dp_adam(theta, state, g, config);
      return;
    case OptimizerKind::kDpAdamBC:
      step_dp_adambc(theta, state, g, config, phi);
      return;
    case OptimizerKind::kDpAdamFakePhi:
      step_dp_adam_fakephi(theta, state, g, config);
      return;
  }
  throw ConfigError("bad optimizer kind");
}

double convert_lr(double eta_adam, double beta, Phi phi,
                  std::optional<std::int64_t> t) {
  if (!(phi.value > 0.0))
    throw DomainError("learning-rate conversion undefined for Phi = 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("beta must be in [0,1)");
  const double root = std::sqrt(phi.value);
  if (!t.has_value()) return eta_adam * (1.0 - beta) / root;
  if (*t < 1) throw DomainError("t must be >= 1");
  const double denom = 1.0 - std::pow(beta, static_cast<double>(*t));
  return eta_adam * (1.0 - beta) / (denom * root);
}

namespace {

json config_to_json(const OptimizerConfig& c) {
  json j;
  j["kind"] = optimizer_kind_name(c.kind);
  j["eta"] = format_double(c.eta);
  j["beta1"] = format_double(c.beta1);
  j["beta2"] = format_double(c.beta2);
  j["gamma"] = format_double(c.gamma);
  j["gamma_prime"] = format_double(c.gamma_prime);
  j["momentum_beta"] = format_double(c.momentum_beta);
  if (c.phi_override.has_value()) {
    j["phi_override"] = format_double(*c.phi_override);
    j["phi_override_mode"] =
        c.phi_mode == FakePhiMode::kSubtract ? "subtract" : "add";
  }
  if (!c.lr_schedule.empty()) {
    json sched = json::array();
    for (double s : c.lr_schedule) sched.push_back(format_double(s));
    j["lr_schedule"] = sched;
  }
  return j;
}

OptimizerConfig config_from_json(const json& j) {
  OptimizerConfig c;
  c.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
  c.eta = parse_double(j.at("eta").get<std::string>());
  c.beta1 = parse_double(j.at("beta1").get<std::string>());
  c.beta2 = parse_double(j.at("beta2").get<std::string>());
  c.gamma = parse_double(j.at("gamma").get<std::string>());
  c.gamma_prime = parse_double(j.at("gamma_prime").get<std::string>());
  c.momentum_beta = parse_double(j.at("momentum_beta").get<std::string>());
  if (j.contains("phi_override")) {
    c.phi_override = parse_double(j.at("phi_override").get<std::string>());
    c.phi_mode = j.at("phi_override_mode").get<std::string>() == "add"
                     ? FakePhiMode::kAdd
                     : FakePhiMode::kSubtract;
  }
  if (j.contains("lr_schedule"))
    for (const auto& s : j.at("lr_schedule"))
      c.lr_schedule.push_back(parse_double(s.get<std::string>()));
  return c;
}

}  // namespace

std::string checkpoint_to_json(const OptimizerConfig& config,
                               const MomentState& state) {
  json j;
  j["config"] = config_to_json(config);
  j["t"] = state.t;
  json m = json::array(), v = json::array();
  for (double x : state.m) m.push_back(format_double(x));
  for (double x : state.v) v.push_back(format_double(x));
  j["m"] = m;
  j["v"] = v;
  return j.dump(2);
}

void checkpoint_from_json(const std::string& json_text, OptimizerConfig& config,
                          MomentState& state) {
  json j = json::parse(json_text);
  config = config_from_json(j.at("config"));
  state.t = j.at("t").get<std::int64_t>();
  state.m.clear();
  state.v.clear();
  for (const auto& x : j.at("m")) state.m.push_back(parse_double(x.get<std::string>()));
  for (const auto& x : j.at("v")) state.v.push_back(parse_double(x.get<std::string>()));
  if (state.m.size() != state.v.size())
    throw InputError("checkpoint m/v length mismatch");
}

}  // namespace dpopt
