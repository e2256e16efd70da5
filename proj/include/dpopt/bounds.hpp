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

#ifndef DPOPT_BOUNDS_HPP_
#define DPOPT_BOUNDS_HPP_

#include <cstdint>
#include <vector>

namespace dpopt {

// Inputs of one concentration-bound evaluation. alpha_tol is the tail
// probability of the bound, unrelated to RDP orders.
struct BoundQuery {
  double batch = 0.0;      // B
  double clip_norm = 0.0;  // C
  double sigma = 0.0;
  double beta2 = 0.0;      // in (0,1)
  std::int64_t t = 1;      // step >= 1
  double alpha_tol = 0.0;  // in (0,1)

  void validate() const;
};

// Sub-exponential parameters (nu, b) of beta * Z^2 for
// Z ~ N(0, sigma^2 C^2 / B^2): nu = 2a, b = 4a with a = beta sigma^2 C^2 / B^2.
struct SubExpParams {
  double nu = 0.0;
  double b = 0.0;
};

SubExpParams noise_sq_subexp_params(double beta_coeff, double sigma, double clip_norm,
                           double batch);

enum class BoundBranch { kSubGaussian, kSubExponential };

struct BoundResult {
  double xi = 0.0;
  BoundBranch branch = BoundBranch::kSubGaussian;
  double nu = 0.0;
  double b = 0.0;
};

// Two-branch sub-exponential tail bound at tolerance alpha, prefactor
// (1-beta2)/(1-beta2^t). The sub-Gaussian solution
// delta = sqrt(2 nu^2 ln(2/alpha)) is used when it satisfies its own
// condition delta <= nu^2/b; otherwise the sub-exponential solution
// delta = 2 b ln(2/alpha) applies (and then always satisfies delta >= nu^2/b,
// so exactly one branch is self-consistent).
//
// fixed-sequence: nu = (4 sigma^2 C^2/B^2) sqrt((1-beta2^2t)/(1-beta2^2)),
// valid when the gradient sequence is fixed in advance.
// martingale: nu = 2 sqrt((1-beta2^2t)/(1-beta2^2)) (sigma^2C^2/B^2 + sigma C^2/B),
// valid when parameters depend on earlier noise draws.
// Both use b = 4 sigma^2 C^2 / B^2.
BoundResult fixed_sequence_bound_detail(const BoundQuery& q);
BoundResult martingale_bound_detail(const BoundQuery& q);
double fixed_sequence_bound(const BoundQuery& q);
double martingale_bound(const BoundQuery& q);

// Paired second-moment snapshots from a diagnostics run.
struct PairedMoments {
  std::int64_t t = 0;
  std::vector<double> v_hat_p;
  std::vector<double> v_hat_c;
};

struct DeviationTable {
  std::vector<std::int64_t> steps;
  std::vector<double> levels;  // tail probabilities, e.g. {0.01, 0.05, 0.10}
  // values[i][j]: empirical (1 - levels[j]) quantile across coordinates of
  // |v_hat_p - (v_hat_c + phi)| at steps[i].
  std::vector<std::vector<double>> values;
};

// Per-step tail quantiles of the observed DP bias deviation from phi.
DeviationTable empirical_deviation(const std::vector<PairedMoments>& trace,
                                   double phi,
                                   const std::vector<double>& levels = {
                                       0.01, 0.05, 0.10});

}  // namespace dpopt

#endif  // DPOPT_BOUNDS_HPP_
