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
//
// Test-only oracles, independent of the library implementations they check.

#ifndef DPOPT_TESTS_ORACLES_HPP_
#define DPOPT_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dpopt/dataset.hpp"
#include "dpopt/model.hpp"

namespace oracles {

// Central finite differences of the mean loss over a slice, step h on each
// coordinate of theta.
inline std::vector<double> fd_gradient(const dpopt::Model& model,
                                       const dpopt::Dataset& data,
                                       std::span<const std::size_t> idx,
                                       double h = 1e-5) {
  dpopt::Model probe = model;
  std::vector<double> g(model.dim());
  for (std::size_t j = 0; j < model.dim(); ++j) {
    const double saved = probe.params[j];
    probe.params[j] = saved + h;
    const double up = dpopt::loss(probe, data, idx);
    probe.params[j] = saved - h;
    const double down = dpopt::loss(probe, data, idx);
    probe.params[j] = saved;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_err_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// Explicit weighted sums behind the EMA recursions:
//   m_t = (1-beta) sum_tau beta^{t-tau} g_tau,
//   b_t = sum_tau beta^{t-tau} g_tau  (momentum form, no (1-beta) factor).
inline double unrolled_ema(std::span<const double> stream, double beta) {
  const std::size_t t = stream.size();
  double acc = 0.0;
  for (std::size_t tau = 1; tau <= t; ++tau)
    acc += std::pow(beta, static_cast<double>(t - tau)) * stream[tau - 1];
  return (1.0 - beta) * acc;
}

inline double unrolled_momentum(std::span<const double> stream, double beta) {
  const std::size_t t = stream.size();
  double acc = 0.0;
  for (std::size_t tau = 1; tau <= t; ++tau)
    acc += std::pow(beta, static_cast<double>(t - tau)) * stream[tau - 1];
  return acc;
}

inline double unrolled_ema_sq(std::span<const double> stream, double beta) {
  const std::size_t t = stream.size();
  double acc = 0.0;
  for (std::size_t tau = 1; tau <= t; ++tau)
    acc += std::pow(beta, static_cast<double>(t - tau)) * stream[tau - 1] *
           stream[tau - 1];
  return (1.0 - beta) * acc;
}

// Renyi divergence of order alpha between the subsampled-Gaussian mixture
// P = (1-q) N(0,s^2) + q N(1,s^2) and the base Q = N(0,s^2), by log-space
// Simpson quadrature of integral P^alpha Q^(1-alpha). Built to validate the
// closed-form series the accountant uses.
inline double rdp_quadrature(double alpha, double q, double sigma,
                             std::size_t npts = 200001) {
  const double lo = -14.0 * sigma - 2.0;
  const double hi = alpha + 14.0 * sigma + 2.0;
  const double dx = (hi - lo) / static_cast<double>(npts - 1);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double log_norm = -0.5 * std::log(2.0 * M_PI * sigma * sigma);
  const double log_q = q > 0.0 ? std::log(q) : -1e308;
  const double log_1mq = q < 1.0 ? std::log1p(-q) : -1e308;

  auto logaddexp = [](double a, double b) {
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
  };

  double max_h = -1e308;
  std::vector<double> hvals(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double lp0 = log_norm - x * x * inv2s2;
    const double lp1 = log_norm - (x - 1.0) * (x - 1.0) * inv2s2;
    const double lmix = q >= 1.0 ? lp1 : logaddexp(log_1mq + lp0, log_q + lp1);
    double h = alpha * lmix + (1.0 - alpha) * lp0;
    // Simpson weights 1,4,2,...,4,1
    const double w = (i == 0 || i + 1 == npts) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    h += std::log(w);
    hvals[i] = h;
    max_h = std::max(max_h, h);
  }
  double acc = 0.0;
  for (double h : hvals) acc += std::exp(h - max_h);
  const double log_integral = max_h + std::log(acc) + std::log(dx / 3.0);
  return std::max(0.0, log_integral) / (alpha - 1.0);
}

}  // namespace oracles

#endif  // DPOPT_TESTS_ORACLES_HPP_
