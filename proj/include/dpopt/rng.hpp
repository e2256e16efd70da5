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

#ifndef DPOPT_RNG_HPP_
#define DPOPT_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

namespace dpopt {

// Stream ids keep the independent generators of one run apart. Sampling and
// noise are separate so that "same noise, different optimizer" replays are
// exact even when the two optimizers consume different batch sequences.
enum class Stream : std::uint64_t {
  kData = 1,
  kInit = 2,
  kSampling = 3,
  kNoise = 4,
};

// Deterministic per-step random source. A fresh mt19937_64 is derived from
// (seed, stream, step) via std::seed_seq, so position within a training run
// is addressable: re-creating the object replays the step's draws exactly.
//
// Gaussian variates use the Box-Muller transform on 53-bit uniforms. Unlike
// rejection-based methods the uniform consumption per call is fixed, so the
// draw count never depends on the values drawn.
class StepRng {
 public:
  StepRng(std::uint64_t seed, Stream stream, std::uint64_t step);

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached and returned by the next call.
  double gaussian();

  // Uniform integer in [0, n). Fixed consumption of one 64-bit word
  // (128-bit multiply-shift; bias < 2^-53 for the n used here).
  std::uint64_t below(std::uint64_t n);

  // Convenience: d iid N(0, stddev^2) draws.
  std::vector<double> gaussian_vector(std::size_t d, double stddev);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dpopt

#endif  // DPOPT_RNG_HPP_
