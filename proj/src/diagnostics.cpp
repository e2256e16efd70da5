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

#include "dpopt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dpopt/csvio.hpp"
#include "dpopt/error.hpp"

namespace dpopt {

MomentChannels::MomentChannels(std::size_t dim, const ChannelConfig& config)
    : config_(config), clean_(dim), private_(dim) {
  if (!(config.gamma_prime > 0.0)) throw ConfigError("gamma_prime must be > 0");
  if (!(config.phi >= 0.0)) throw ConfigError("phi must be >= 0");
}

void MomentChannels::advance(const std::vector<double>& clean_grad,
                             const std::vector<double>& noise) {
  if (clean_grad.size() != dim() || noise.size() != dim())
    throw ShapeError("channel dimension mismatch");
  if (clean_.t != private_.t)
    throw InputError("channel step counters out of sync");
  const double b1 = config_.beta1, b2 = config_.beta2;
  for (std::size_t j = 0; j < dim(); ++j) {
    const double gc = clean_grad[j];
    const double gp = clean_grad[j] + noise[j];
    clean_.m[j] = b1 * clean_.m[j] + (1.0 - b1) * gc;
    clean_.v[j] = b2 * clean_.v[j] + (1.0 - b2) * gc * gc;
    private_.m[j] = b1 * private_.m[j] + (1.0 - b1) * gp;
    private_.v[j] = b2 * private_.v[j] + (1.0 - b2) * gp * gp;
  }
  ++clean_.t;
  ++private_.t;
}

MomentSnapshot MomentChannels::snapshot() const {
  MomentSnapshot s;
  s.t = clean_.t;
  const double t = static_cast<double>(clean_.t);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  const std::size_t d = dim();
  s.m_hat_c.resize(d);
  s.m_hat_p.resize(d);
  s.v_hat_c.resize(d);
  s.v_hat_p.resize(d);
  s.v_hat_corr.resize(d);
  s.delta_c.resize(d);
  s.delta_p.resize(d);
  s.delta_corr.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    s.m_hat_c[j] = clean_.m[j] / bc1;
    s.m_hat_p[j] = private_.m[j] / bc1;
    s.v_hat_c[j] = clean_.v[j] / bc2;
    s.v_hat_p[j] = private_.v[j] / bc2;
    s.v_hat_corr[j] = std::max(s.v_hat_p[j] - config_.phi, config_.gamma_prime);
    s.delta_c[j] = s.m_hat_p[j] / std::sqrt(s.v_hat_c[j]);
    s.delta_p[j] = s.m_hat_p[j] / std::sqrt(s.v_hat_p[j]);
    s.delta_corr[j] = s.m_hat_p[j] / std::sqrt(s.v_hat_corr[j]);
  }
  return s;
}

MomentSnapshot track_step(MomentChannels& channels,
                          const std::vector<double>& clean_grad,
                          const std::vector<double>& noise) {
  channels.advance(clean_grad, noise);
  return channels.snapshot();
}

void write_snapshot_csv(const std::vector<MomentSnapshot>& snaps,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path);
  CsvWriter w(out);
  w.row({"step", "channel", "statistic", "value"});
  const char* stat_names[6] = {"min", "q1", "median", "q3", "max", "mean"};
  for (const auto& s : snaps) {
    const std::vector<std::pair<std::string, const std::vector<double>*>> chans = {
        {"m_hat_c", &s.m_hat_c},   {"m_hat_p", &s.m_hat_p},
        {"v_hat_c", &s.v_hat_c},   {"v_hat_p", &s.v_hat_p},
        {"v_hat_corr", &s.v_hat_corr}, {"delta_c", &s.delta_c},
        {"delta_p", &s.delta_p},   {"delta_corr", &s.delta_corr}};
    for (const auto& [name, vec] : chans) {
      const SummaryStats st = summarize(*vec);
      const double vals[6] = {st.min, st.q1, st.median, st.q3, st.max, st.mean};
      for (int k = 0; k < 6; ++k)
        w.row({std::to_string(s.t), name, stat_names[k], format_double(vals[k])});
    }
  }
}

void write_histogram_csv(const Histogram& hist, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path);
  CsvWriter w(out);
  w.row({"bin_left", "bin_right", "count"});
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    w.row({format_double(hist.edges[i]), format_double(hist.edges[i + 1]),
           std::to_string(hist.counts[i])});
}

std::vector<ConsistencyPoint> consistency_check(
    double signal, const PrivacySpec& spec,
    const std::vector<double>& beta2_schedule, int n_seeds, std::uint64_t seed,
    double gamma_prime) {
  spec.validate();
  if (std::fabs(signal) > spec.clip_norm)
    throw InputError("stationary signal must satisfy |signal| <= C");
  if (n_seeds < 1) throw InputError("need n_seeds >= 1");
  const double phi = compute_phi(spec).value;
  const double noise_sd = spec.noise_multiplier * spec.clip_norm /
                          static_cast<double>(spec.expected_batch);
  const double target = signal == 0.0 ? 0.0 : (signal > 0.0 ? 1.0 : -1.0);

  std::vector<ConsistencyPoint> curve;
  for (std::size_t sched_idx = 0; sched_idx < beta2_schedule.size(); ++sched_idx) {
    const double b2 = beta2_schedule[sched_idx];
    if (!(b2 > 0.0 && b2 < 1.0)) throw ConfigError("beta2 must be in (0,1)");
    ConsistencyPoint pt;
    pt.beta2 = b2;
    pt.beta1 = 1.0 - std::sqrt(1.0 - b2);
    pt.t = static_cast<std::int64_t>(std::llround(10.0 / (1.0 - b2)));
    std::vector<double> errs, dcorr, dpriv;
    for (int s = 0; s < n_seeds; ++s) {
      StepRng rng(seed + static_cast<std::uint64_t>(s), Stream::kNoise,
                  sched_idx);
      double m = 0.0, v = 0.0;
      for (std::int64_t tt = 0; tt < pt.t; ++tt) {
        const double g = signal + noise_sd * rng.gaussian();
        m = pt.beta1 * m + (1.0 - pt.beta1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
      }
      const double td = static_cast<double>(pt.t);
      const double m_hat = m / (1.0 - std::pow(pt.beta1, td));
      const double v_hat = v / (1.0 - std::pow(b2, td));
      const double corr = std::max(v_hat - phi, gamma_prime);
      const double d_corr = m_hat / std::sqrt(corr);
      const double d_priv = m_hat / std::sqrt(v_hat);
      errs.push_back(std::fabs(d_corr - target));
      dcorr.push_back(std::fabs(d_corr));
      dpriv.push_back(std::fabs(d_priv));
    }
    pt.median_error = quantile(errs, 0.5);
    pt.median_abs_delta_corr = quantile(dcorr, 0.5);
    pt.median_abs_delta_private = quantile(dpriv, 0.5);
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace dpopt
