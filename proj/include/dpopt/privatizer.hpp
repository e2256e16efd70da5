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

#ifndef DPOPT_PRIVATIZER_HPP_
#define DPOPT_PRIVATIZER_HPP_

#include <cstdint>
#include <vector>

#include "dpopt/dataset.hpp"
#include "dpopt/model.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

// The DP tuple: clip norm C, noise multiplier sigma, expected batch B,
// dataset size N, and the (epsilon, delta) target.
struct PrivacySpec {
  double clip_norm = 0.0;         // C > 0
  double noise_multiplier = 0.0;  // sigma >= 0
  std::int64_t expected_batch = 0;  // B >= 1
  std::int64_t dataset_size = 0;    // N >= B
  double target_epsilon = 0.0;      // > 0
  double target_delta = 0.0;        // in (0,1)

  void validate() const;
  double sampling_q() const;  // B / N
};

// Each index joins the batch independently with probability q, in index
// order; one uniform is consumed per index.
std::vector<std::size_t> poisson_sample(std::size_t n, double q, StepRng& rng);

// Diagnostics-mode sampling: Fisher-Yates shuffle, first B indices.
// Privacy accounting is NOT valid for runs sampled this way.
std::vector<std::size_t> fixed_batch_sample(std::size_t n, std::size_t batch,
                                            StepRng& rng);

// g / max(1, |g|_2 / C). Returns g unchanged when already within the ball.
std::vector<double> clip(std::vector<double> g, double clip_norm);

struct PrivateGradient {
  std::vector<double> g_tilde;  // g_bar + noise, elementwise
  std::vector<double> g_bar;    // (1/B) sum of clipped rows; kept when asked
  std::vector<double> noise;    // (1/B) z; kept when asked
  bool has_clean = false;
  bool empty_batch = false;
  std::int64_t noise_draw_id = 0;
};

// The DP gradient: clip each row to C, sum in row order, add
// z ~ N(0, sigma^2 C^2 I_d) from the step's noise stream, divide by the
// NOMINAL batch size B (not the realized one), so the per-coordinate noise
// deviation is exactly sigma C / B. g_tilde is assembled as
// g_bar + (1/B) z coordinatewise, so the decomposition consumed by the
// diagnostics channels is bit-exact.
PrivateGradient privatize(const PerExampleGrads& grads, const PrivacySpec& spec,
                          StepRng& noise_rng, std::int64_t step,
                          bool keep_clean);

}  // namespace dpopt

#endif  // DPOPT_PRIVATIZER_HPP_
