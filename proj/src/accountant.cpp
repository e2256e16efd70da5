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

#include "dpopt/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpopt/error.hpp"

namespace dpopt {

std::vector<double> default_rdp_orders() {
  std::vector<double> orders;
  for (int a = 2; a <= 64; ++a) orders.push_back(static_cast<double>(a));
  orders.push_back(128.0);
  orders.push_back(256.0);
  return orders;
}

double rdp_gaussian(double alpha, double sigma) {
  if (!(alpha > 1.0)) throw DomainError("RDP order must be > 1");
  if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
  return alpha / (2.0 * sigma * sigma);
}

double rdp_subsampled_gaussian(std::int64_t alpha, double q, double sigma) {
  if (alpha < 2) throw DomainError("subsampled RDP needs integer order >= 2");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must be in (0,1]");
  if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
  if (q == 1.0) return rdp_gaussian(static_cast<double>(alpha), sigma);

  // log-sum-exp over the binomial terms; all terms are positive.
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(static_cast<std::size_t>(alpha) + 1);
  for (std::int64_t k = 0; k <= alpha; ++k) {
    const double log_binom = std::lgamma(static_cast<double>(alpha) + 1.0) -
                             std::lgamma(static_cast<double>(k) + 1.0) -
                             std::lgamma(static_cast<double>(alpha - k) + 1.0);
    const double t = log_binom + static_cast<double>(alpha - k) * log_1mq +
                     static_cast<double>(k) * log_q +
                     static_cast<double>(k) * static_cast<double>(k - 1) * inv_2s2;
    terms[static_cast<std::size_t>(k)] = t;
    max_term = std::max(max_term, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  const double log_a = max_term + std::log(acc);
  // The mixture majorizes the base distribution, so log_a >= 0 up to rounding.
  return std::max(0.0, log_a) / (static_cast<double>(alpha) - 1.0);
}

RdpCurve single_step_curve(double q, double sigma,
                           const std::vector<double>& orders) {
  if (orders.empty()) throw DomainError("empty RDP order grid");
  RdpCurve curve;
  curve.orders = orders;
  curve.values.reserve(orders.size());
  curve.steps_composed = 1;
  for (double a : orders) {
    const double a_int = std::round(a);
    if (a != a_int || a < 2.0)
      throw DomainError("order grid must hold integers >= 2");
    curve.values.push_back(
        rdp_subsampled_gaussian(static_cast<std::int64_t>(a_int), q, sigma));
  }
  return curve;
}

RdpCurve compose(const RdpCurve& curve, std::int64_t steps) {
  if (steps < 1) throw DomainError("composition needs steps >= 1");
  RdpCurve out = curve;
  for (double& v : out.values) v *= static_cast<double>(steps);
  out.steps_composed = curve.steps_composed * steps;
  return out;
}

EpsilonResult to_epsilon_delta(const RdpCurve& curve, double delta) {
  if (curve.orders.empty() || curve.orders.size() != curve.values.size())
    throw DomainError("empty or inconsistent RDP curve");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must be in (0,1)");
  const double log_inv_delta = std::log(1.0 / delta);
  EpsilonResult best;
  best.epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const double eps = curve.values[i] + log_inv_delta / (curve.orders[i] - 1.0);
    if (eps < best.epsilon) {
      best.epsilon = eps;
      best.best_order = curve.orders[i];
    }
  }
  return best;
}

namespace {

double epsilon_at_steps(const RdpCurve& one_step, std::int64_t steps, double delta) {
  return to_epsilon_delta(compose(one_step, steps), delta).epsilon;
}

}  // namespace

std::int64_t calibrate_steps(const PrivacySpec& spec) {
  spec.validate();
  if (spec.noise_multiplier <= 0.0)
    throw InfeasibleError("cannot meet a finite epsilon target with sigma = 0");
  const RdpCurve one = single_step_curve(spec.sampling_q(), spec.noise_multiplier);
  const double target = spec.target_epsilon;
  if (epsilon_at_steps(one, 1, spec.target_delta) > target)
    throw InfeasibleError("epsilon target infeasible even for a single step");
  std::int64_t lo = 1, hi = 2;
  while (epsilon_at_steps(one, hi, spec.target_delta) <= target) {
    lo = hi;
    if (hi > (std::int64_t{1} << 40)) return hi;  // effectively unbounded
    hi *= 2;
  }
  // invariant: eps(lo) <= target < eps(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (epsilon_at_steps(one, mid, spec.target_delta) <= target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double calibrate_sigma(const PrivacySpec& spec, std::int64_t steps) {
  spec.validate();
  if (steps < 1) throw DomainError("steps must be >= 1");
  const double q = spec.sampling_q();
  const double delta = spec.target_delta;
  const double target = spec.target_epsilon;
  auto eps_at = [&](double sigma) {
    return epsilon_at_steps(single_step_curve(q, sigma), steps, delta);
  };
  double lo = 1e-3, hi = 1.0;
  while (eps_at(hi) > target) {
    hi *= 2.0;
    if (hi > 1e6) throw InfeasibleError("no sigma <= 1e6 meets the target");
  }
  while (lo > 1e-6 && eps_at(lo) <= target) lo *= 0.5;
  // invariant: eps(hi) <= target; bisect until the bracket is tight
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (eps_at(mid) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace dpopt
