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

#ifndef DPOPT_OPTIMIZER_HPP_
#define DPOPT_OPTIMIZER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpopt/privatizer.hpp"

namespace dpopt {

enum class OptimizerKind {
  kDpSgd,
  kDpSgdm,
  kDpAdam,
  kDpAdamBC,
  kDpAdamFakePhi,
};

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string optimizer_kind_name(OptimizerKind kind);

// Fake-Phi ablation sub-modes: SUBTRACT replaces the true Phi in the
// DP-AdamBC denominator with phi_override; ADD uses sqrt(v_hat + phi_override)
// and is meant for sigma = 0 runs where a constant bias is injected by hand.
enum class FakePhiMode { kSubtract, kAdd };

// The DP-noise bias added to the bias-corrected second moment:
// Phi = (sigma C / B)^2, computed in that order in 64-bit arithmetic.
struct Phi {
  double value = 0.0;
};

Phi compute_phi(double sigma, double clip_norm, double batch);
Phi compute_phi(const PrivacySpec& spec);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kDpAdam;
  double eta = 0.001;          // learning rate > 0
  double beta1 = 0.9;          // [0,1)
  double beta2 = 0.999;        // [0,1)
  double gamma = 1e-8;         // DP-Adam stability, added outside the sqrt
  double gamma_prime = 1e-10;  // DP-AdamBC stability, floor inside the sqrt
  double momentum_beta = 0.9;  // DP-SGDM decay
  std::optional<double> phi_override;  // only for kDpAdamFakePhi
  FakePhiMode phi_mode = FakePhiMode::kSubtract;
  // Optional per-step multiplier on eta; entry t-1 applies at step t and the
  // last entry repeats beyond the end of the table.
  std::vector<double> lr_schedule;

  void validate() const;
  double eta_at(std::int64_t t) const;
};

// Adam-style state. t counts completed steps; m = v = 0 at t = 0.
// For DP-SGDM, m holds the momentum buffer and v stays zero.
struct MomentState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  explicit MomentState(std::size_t d = 0) : m(d, 0.0), v(d, 0.0) {}
};

// One optimization step. theta is updated in place; state advances by one.
// All step functions reject non-finite gradients.
void step_dp_sgd(std::vector<double>& theta, const std::vector<double>& g,
                 const OptimizerConfig& config, std::int64_t t);
void step_dp_sgdm(std::vector<double>& theta, MomentState& state,
                  const std::vector<double>& g, const OptimizerConfig& config);
void step_dp_adam(std::vector<double>& theta, MomentState& state,
                  const std::vector<double>& g, const OptimizerConfig& config);
void step_dp_adambc(std::vector<double>& theta, MomentState& state,
                    const std::vector<double>& g, const OptimizerConfig& config,
                    Phi phi);
void step_dp_adam_fakephi(std::vector<double>& theta, MomentState& state,
                          const std::vector<double>& g,
                          const OptimizerConfig& config);

// Dispatches on config.kind.
void step(std::vector<double>& theta, MomentState& state,
          const std::vector<double>& g, const OptimizerConfig& config, Phi phi);

// The DP-SGDM learning rate that makes it emulate DP-Adam when the latter's
// denominator is dominated by Phi:
//   eta_sgdm(t) = eta_adam (1 - beta) / ((1 - beta^t) sqrt(Phi)).
// Without t, returns the t -> infinity limit eta (1 - beta) / sqrt(Phi).
double convert_lr(double eta_adam, double beta, Phi phi,
                  std::optional<std::int64_t> t = std::nullopt);

// Checkpoint round-trip. Floats travel as 17-significant-digit decimal
// strings, so reload is bit-exact.
std::string checkpoint_to_json(const OptimizerConfig& config,
                               const MomentState& state);
void checkpoint_from_json(const std::string& json_text, OptimizerConfig& config,
                          MomentState& state);

}  // namespace dpopt

#endif  // DPOPT_OPTIMIZER_HPP_
