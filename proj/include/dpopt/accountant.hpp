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

#ifndef DPOPT_ACCOUNTANT_HPP_
#define DPOPT_ACCOUNTANT_HPP_

#include <cstdint>
#include <vector>

#include "dpopt/privatizer.hpp"

namespace dpopt {

// An RDP curve: epsilon(alpha) at a fixed grid of Renyi orders, composed
// over steps_composed mechanism invocations.
struct RdpCurve {
  std::vector<double> orders;  // strictly increasing, each > 1
  std::vector<double> values;  // per-order RDP epsilon >= 0
  std::int64_t steps_composed = 1;
};

// Integer orders 2..64 plus 128 and 256.
std::vector<double> default_rdp_orders();

// Unsubsampled Gaussian mechanism with sensitivity 1 and noise sigma:
// epsilon(alpha) = alpha / (2 sigma^2).
double rdp_gaussian(double alpha, double sigma);

// Poisson-subsampled Gaussian at integer order alpha >= 2, via the exact
// binomial expansion of E_{x~N(0,s^2)}[((1-q) + q e^{(2x-1)/(2s^2)})^alpha]
// evaluated in log space:
//   log sum_k [ C(alpha,k) (1-q)^(alpha-k) q^k e^{k(k-1)/(2 sigma^2)} ]
// divided by (alpha - 1). Reduces to rdp_gaussian at q = 1.
double rdp_subsampled_gaussian(std::int64_t alpha, double q, double sigma);

// One step of the subsampled Gaussian at every order in `orders`.
RdpCurve single_step_curve(double q, double sigma,
                           const std::vector<double>& orders = default_rdp_orders());

// RDP composes additively: values scale by `steps`.
RdpCurve compose(const RdpCurve& curve, std::int64_t steps);

struct EpsilonResult {
  double epsilon = 0.0;
  double best_order = 0.0;
};

// epsilon = min over orders of [ eps(alpha) + ln(1/delta) / (alpha - 1) ].
EpsilonResult to_epsilon_delta(const RdpCurve& curve, double delta);

// Largest step count T whose composed epsilon stays within the spec's
// (epsilon, delta) target. Throws InfeasibleError when even T = 1 exceeds it.
std::int64_t calibrate_steps(const PrivacySpec& spec);

// Smallest noise multiplier meeting the target at the given step count
// (bisection to 1e-9 absolute; the returned value is feasible).
double calibrate_sigma(const PrivacySpec& spec, std::int64_t steps);

}  // namespace dpopt

#endif  // DPOPT_ACCOUNTANT_HPP_
