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

#include "dpopt/privatizer.hpp"

#include <cmath>
#include <numeric>

#include "dpopt/error.hpp"

namespace dpopt {

void PrivacySpec::validate() const {
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm))
    throw ConfigError("clip_norm must be finite and > 0");
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier))
    throw ConfigError("noise_multiplier must be finite and >= 0");
  if (expected_batch < 1) throw ConfigError("expected_batch must be >= 1");
  if (dataset_size < expected_batch)
    throw ConfigError("dataset_size must be >= expected_batch");
  if (!(target_epsilon > 0.0) || !std::isfinite(target_epsilon))
    throw ConfigError("target_epsilon must be finite and > 0");
  if (!(target_delta > 0.0 && target_delta < 1.0))
    throw ConfigError("target_delta must be in (0,1)");
}

double PrivacySpec::sampling_q() const {
  return static_cast<double>(expected_batch) / static_cast<double>(dataset_size);
}

std::vector<std::size_t> poisson_sample(std::size_t n, double q, StepRng& rng) {
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("sampling probability must be in (0,1]");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (rng.uniform() < q) idx.push_back(i);
  return idx;
}

std::vector<std::size_t> fixed_batch_sample(std::size_t n, std::size_t batch,
                                            StepRng& rng) {
  if (batch < 1 || batch > n) throw ConfigError("fixed batch size must be in [1, n]");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(batch);
  return perm;
}

std::vector<double> clip(std::vector<double> g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  double sq = 0.0;
  for (double v : g) {
    if (!std::isfinite(v)) throw InputError("non-finite gradient in clip");
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    const double s = clip_norm / norm;
    for (double& v : g) v *= s;
  }
  return g;
}

PrivateGradient privatize(const PerExampleGrads& grads, const PrivacySpec& spec,
                          StepRng& noise_rng, std::int64_t step,
                          bool keep_clean) {
  spec.validate();
  const std::size_t d = grads.grads.cols;
  const std::size_t b = grads.grads.rows;
  const double C = spec.clip_norm;
  const double inv_B = 1.0 / static_cast<double>(spec.expected_batch);

  PrivateGradient out;
  out.noise_draw_id = step;
  out.empty_batch = (b == 0);
  std::vector<double> sum(d, 0.0);
  for (std::size_t r = 0; r < b; ++r) {
    const double* g = grads.grads.row(r);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(g[j])) throw InputError("non-finite per-example gradient");
      sq += g[j] * g[j];
    }
    const double norm = std::sqrt(sq);
    const double s = norm > C ? C / norm : 1.0;
    for (std::size_t j = 0; j < d; ++j) sum[j] += s * g[j];
  }

  out.g_tilde.resize(d);
  if (keep_clean) {
    out.g_bar.resize(d);
    out.noise.resize(d);
    out.has_clean = true;
  }
  const double noise_sd = spec.noise_multiplier * C;
  for (std::size_t j = 0; j < d; ++j) {
    const double z = noise_sd > 0.0 ? noise_sd * noise_rng.gaussian() : 0.0;
    const double gb = sum[j] * inv_B;
    const double nz = z * inv_B;
    out.g_tilde[j] = gb + nz;
    if (keep_clean) {
      out.g_bar[j] = gb;
      out.noise[j] = nz;
    }
  }
  return out;
}

}  // namespace dpopt
