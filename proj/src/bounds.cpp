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

#include "dpopt/bounds.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "dpopt/error.hpp"
#include "dpopt/stats.hpp"

namespace dpopt {

void BoundQuery::validate() const {
  if (!(batch >= 1.0)) throw ConfigError("B must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("C must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in (0,1)");
  if (t < 1) throw ConfigError("t must be >= 1");
  if (!(alpha_tol > 0.0 && alpha_tol < 1.0))
    throw ConfigError("alpha must be in (0,1)");
}

SubExpParams noise_sq_subexp_params(double beta_coeff, double sigma, double clip_norm,
                           double batch) {
  if (!(beta_coeff >= 0.0 && beta_coeff <= 1.0))
    throw ConfigError("beta must be in [0,1]");
  if (!(batch >= 1.0) || !(clip_norm > 0.0) || !(sigma >= 0.0))
    throw ConfigError("bad Lemma parameters");
  const double a = beta_coeff * sigma * sigma * clip_norm * clip_norm / (batch * batch);
  return SubExpParams{2.0 * a, 4.0 * a};
}

namespace {

// beta2^t for t up to ~1e6 via exp(t ln beta2); 1 - beta2^t via expm1 to
// keep precision when t(1 - beta2) is small.
double one_minus_pow(double beta2, double t) {
  return -std::expm1(t * std::log(beta2));
}

BoundResult two_branch_bound(const BoundQuery& q, double nu, double b) {
  const double prefactor =
      (1.0 - q.beta2) / one_minus_pow(q.beta2, static_cast<double>(q.t));
  const double log_term = std::log(2.0 / q.alpha_tol);
  const double delta_gauss = std::sqrt(2.0 * nu * nu * log_term);
  BoundResult r;
  r.nu = nu;
  r.b = b;
  if (delta_gauss <= nu * nu / b) {
    r.branch = BoundBranch::kSubGaussian;
    r.xi = prefactor * delta_gauss;
    return r;
  }
  const double delta_exp = 2.0 * b * log_term;
  // When the sub-Gaussian condition fails, the sub-exponential one holds:
  // delta_gauss > nu^2/b  <=>  2 ln(2/a) > nu^2/b^2  <=>  delta_exp > nu^2/b.
  assert(delta_exp >= nu * nu / b);
  r.branch = BoundBranch::kSubExponential;
  r.xi = prefactor * delta_exp;
  return r;
}

}  // namespace

BoundResult fixed_sequence_bound_detail(const BoundQuery& q) {
  q.validate();
  const double phi_like = q.sigma * q.sigma * q.clip_norm * q.clip_norm /
                          (q.batch * q.batch);
  const double ratio = one_minus_pow(q.beta2, 2.0 * static_cast<double>(q.t)) /
                       (1.0 - q.beta2 * q.beta2);
  const double nu = 4.0 * phi_like * std::sqrt(ratio);
  const double b = 4.0 * phi_like;
  return two_branch_bound(q, nu, b);
}

BoundResult martingale_bound_detail(const BoundQuery& q) {
  q.validate();
  const double phi_like = q.sigma * q.sigma * q.clip_norm * q.clip_norm /
                          (q.batch * q.batch);
  const double cross = q.sigma * q.clip_norm * q.clip_norm / q.batch;
  const double ratio = one_minus_pow(q.beta2, 2.0 * static_cast<double>(q.t)) /
                       (1.0 - q.beta2 * q.beta2);
  const double nu = 2.0 * std::sqrt(ratio) * (phi_like + cross);
  const double b = 4.0 * phi_like;
  return two_branch_bound(q, nu, b);
}

double fixed_sequence_bound(const BoundQuery& q) { return fixed_sequence_bound_detail(q).xi; }
double martingale_bound(const BoundQuery& q) { return martingale_bound_detail(q).xi; }

DeviationTable empirical_deviation(const std::vector<PairedMoments>& trace,
                                   double phi,
                                   const std::vector<double>& levels) {
  if (trace.empty()) throw InputError("empty moment trace");
  DeviationTable table;
  table.levels = levels;
  for (const auto& snap : trace) {
    if (snap.v_hat_p.size() != snap.v_hat_c.size() || snap.v_hat_p.empty())
      throw InputError("unpaired moment trace at t=" + std::to_string(snap.t));
    std::vector<double> dev(snap.v_hat_p.size());
    for (std::size_t i = 0; i < dev.size(); ++i)
      dev[i] = std::fabs(snap.v_hat_p[i] - (snap.v_hat_c[i] + phi));
    std::sort(dev.begin(), dev.end());
    std::vector<double> row;
    row.reserve(levels.size());
    for (double lvl : levels) row.push_back(quantile_sorted(dev, 1.0 - lvl));
    table.steps.push_back(snap.t);
    table.values.push_back(std::move(row));
  }
  return table;
}

}  // namespace dpopt
