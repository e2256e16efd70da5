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

#ifndef DPOPT_DIAGNOSTICS_HPP_
#define DPOPT_DIAGNOSTICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dpopt/optimizer.hpp"
#include "dpopt/privatizer.hpp"
#include "dpopt/stats.hpp"

namespace dpopt {

// Parallel moment channels over one gradient stream: the private channels
// consume g_bar + noise, the clean ones g_bar alone, and the corrected
// second moment is max(v_hat_p - phi, gamma_prime). Updates follow the
// Delta^c = m_hat_p / sqrt(v_hat_c), Delta^p = m_hat_p / sqrt(v_hat_p),
// Delta^corr = m_hat_p / sqrt(v_hat_corr) convention (private numerator;
// the clean denominator carries no stability constant).
struct ChannelConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double gamma_prime = 1e-10;
  double phi = 0.0;
};

struct MomentSnapshot {
  std::int64_t t = 0;
  std::vector<double> m_hat_c, m_hat_p;
  std::vector<double> v_hat_c, v_hat_p, v_hat_corr;
  std::vector<double> delta_c, delta_p, delta_corr;
};

class MomentChannels {
 public:
  MomentChannels(std::size_t dim, const ChannelConfig& config);

  // Advance all channels by one step on the shared (g_bar, noise) pair.
  void advance(const std::vector<double>& clean_grad,
               const std::vector<double>& noise);

  MomentSnapshot snapshot() const;

  std::int64_t step() const { return clean_.t; }
  std::size_t dim() const { return clean_.m.size(); }
  const ChannelConfig& config() const { return config_; }

 private:
  ChannelConfig config_;
  MomentState clean_;
  MomentState private_;
};

// advance + snapshot in one call.
MomentSnapshot track_step(MomentChannels& channels,
                          const std::vector<double>& clean_grad,
                          const std::vector<double>& noise);

// Snapshot export: one CSV row per (step, channel, statistic).
void write_snapshot_csv(const std::vector<MomentSnapshot>& snaps,
                        const std::string& path);
void write_histogram_csv(const Histogram& hist, const std::string& path);

// One point of the Proposition-2 consistency check: running the corrected
// estimator on a stationary stream of mean `signal` plus DP noise, with
// beta1 = 1 - sqrt(1 - beta2) and t = 10 / (1 - beta2).
struct ConsistencyPoint {
  double beta2 = 0.0;
  double beta1 = 0.0;
  std::int64_t t = 0;
  double median_error = 0.0;        // |Delta_corr - signal/sqrt(E[g^2])|
  double median_abs_delta_corr = 0.0;
  double median_abs_delta_private = 0.0;
};

// Monte-Carlo estimator error along a beta2 schedule; medians over n_seeds
// independent noise streams. The stationary stream has zero minibatch
// variance: g_bar = signal at every step, so the only randomness is DP noise.
std::vector<ConsistencyPoint> consistency_check(
    double signal, const PrivacySpec& spec,
    const std::vector<double>& beta2_schedule, int n_seeds, std::uint64_t seed,
    double gamma_prime = 1e-10);

}  // namespace dpopt

#endif  // DPOPT_DIAGNOSTICS_HPP_
