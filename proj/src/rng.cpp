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

#include "dpopt/rng.hpp"

#include <cmath>

namespace dpopt {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

StepRng::StepRng(std::uint64_t seed, Stream stream, std::uint64_t step) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(static_cast<std::uint64_t>(stream)),
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  engine_.seed(seq);
}

std::uint64_t StepRng::next_u64() { return engine_(); }

double StepRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double StepRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = kTwoPi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t StepRng::below(std::uint64_t n) {
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
  return static_cast<std::uint64_t>(wide >> 64);
}

std::vector<double> StepRng::gaussian_vector(std::size_t d, double stddev) {
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = stddev * gaussian();
  return out;
}

}  // namespace dpopt
