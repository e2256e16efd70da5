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

#include <doctest.h>

#include <cmath>

#include "dpopt/accountant.hpp"
#include "dpopt/error.hpp"
#include "oracles.hpp"

using namespace dpopt;

TEST_CASE("unsubsampled Gaussian RDP closed form") {
  CHECK(rdp_gaussian(2.0, 1.0) == 1.0);
  CHECK(rdp_gaussian(2.0, 2.0) == 0.25);
  CHECK(rdp_gaussian(32.0, 0.4) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(rdp_gaussian(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(rdp_gaussian(2.0, 0.0), DomainError);
}

TEST_CASE("subsampled Gaussian RDP") {
  SUBCASE("q=1 reduces to the unsubsampled mechanism") {
    CHECK(rdp_subsampled_gaussian(2, 1.0, 1.0) == rdp_gaussian(2.0, 1.0));
    CHECK(rdp_subsampled_gaussian(8, 1.0, 0.7) ==
          doctest::Approx(rdp_gaussian(8.0, 0.7)).epsilon(1e-12));
  }
  SUBCASE("q -> 0 vanishes") {
    CHECK(rdp_subsampled_gaussian(4, 1e-12, 1.0) < 1e-9);
  }
  SUBCASE("monotone non-decreasing in q") {
    double prev = 0.0;
    for (double q : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0}) {
      const double v = rdp_subsampled_gaussian(8, q, 1.0);
      CHECK(v >= prev);
      prev = v;
    }
  }
  SUBCASE("matches the quadrature oracle within 1 percent") {
    for (double q : {256.0 / 550000.0, 0.01, 0.2}) {
      for (double sigma : {0.4, 1.0, 2.0}) {
        for (std::int64_t a : {2, 3, 8, 32, 64}) {
          const double series = rdp_subsampled_gaussian(a, q, sigma);
          const double quad = oracles::rdp_quadrature(static_cast<double>(a), q, sigma);
          CHECK(std::fabs(series - quad) <=
                0.01 * std::max(quad, 1e-12));
        }
      }
    }
  }
}

TEST_CASE("composition is linear in T") {
  const RdpCurve one = single_step_curve(0.01, 1.0);
  const RdpCurve same = compose(one, 1);
  CHECK(same.values == one.values);
  const RdpCurve twice = compose(one, 2);
  for (std::size_t i = 0; i < one.values.size(); ++i)
    CHECK(twice.values[i] == 2.0 * one.values[i]);
  const RdpCurve k = compose(one, 1000);
  for (std::size_t i = 0; i < one.values.size(); ++i)
    CHECK(k.values[i] == 1000.0 * one.values[i]);
  CHECK(k.steps_composed == 1000);
}

TEST_CASE("epsilon-delta conversion") {
  SUBCASE("single order formula") {
    RdpCurve c;
    c.orders = {2.0};
    c.values = {1.0};
    const EpsilonResult r = to_epsilon_delta(c, 1e-5);
    CHECK(r.epsilon == doctest::Approx(1.0 + std::log(1e5)).epsilon(1e-12));
    CHECK(r.best_order == 2.0);
  }
  SUBCASE("larger delta never raises epsilon") {
    const RdpCurve c = compose(single_step_curve(0.01, 1.0), 500);
    const double e1 = to_epsilon_delta(c, 1e-6).epsilon;
    const double e2 = to_epsilon_delta(c, 1e-4).epsilon;
    CHECK(e2 <= e1);
  }
  SUBCASE("empty curve errors") {
    CHECK_THROWS_AS(to_epsilon_delta(RdpCurve{}, 1e-5), DomainError);
  }
}

TEST_CASE("epsilon monotonicity over grids") {
  // increasing in T
  const RdpCurve one = single_step_curve(0.005, 1.0);
  double prev = 0.0;
  for (std::int64_t T : {1, 10, 100, 1000, 10000}) {
    const double e = to_epsilon_delta(compose(one, T), 1e-5).epsilon;
    CHECK(e > prev);
    prev = e;
  }
  // increasing in q
  prev = 0.0;
  for (double q : {1e-4, 1e-3, 1e-2, 0.1}) {
    const double e =
        to_epsilon_delta(compose(single_step_curve(q, 1.0), 1000), 1e-5).epsilon;
    CHECK(e > prev);
    prev = e;
  }
  // decreasing in sigma
  prev = 1e300;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    const double e =
        to_epsilon_delta(compose(single_step_curve(0.01, s), 1000), 1e-5).epsilon;
    CHECK(e < prev);
    prev = e;
  }
}

namespace {

PrivacySpec preset(double C, double sigma, std::int64_t B, std::int64_t N,
                   double eps, double delta) {
  PrivacySpec s;
  s.clip_norm = C;
  s.noise_multiplier = sigma;
  s.expected_batch = B;
  s.dataset_size = N;
  s.target_epsilon = eps;
  s.target_delta = delta;
  return s;
}

// Independent calibration through the quadrature oracle.
std::int64_t oracle_calibrate_steps(const PrivacySpec& spec) {
  const double q = spec.sampling_q();
  std::vector<double> vals;
  const auto orders = default_rdp_orders();
  for (double a : orders)
    vals.push_back(oracles::rdp_quadrature(a, q, spec.noise_multiplier, 60001));
  auto eps_at = [&](std::int64_t T) {
    double best = 1e300;
    for (std::size_t i = 0; i < orders.size(); ++i)
      best = std::min(best, vals[i] * static_cast<double>(T) +
                                std::log(1.0 / spec.target_delta) / (orders[i] - 1.0));
    return best;
  };
  std::int64_t lo = 1, hi = 2;
  while (eps_at(hi) <= spec.target_epsilon) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (eps_at(mid) <= spec.target_epsilon ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("calibrate_steps satisfies its bracketing contract") {
  const PrivacySpec spec = preset(0.1, 0.4, 256, 550000, 7.0, 1e-5);
  const std::int64_t T = calibrate_steps(spec);
  const RdpCurve one = single_step_curve(spec.sampling_q(), spec.noise_multiplier);
  CHECK(to_epsilon_delta(compose(one, T), 1e-5).epsilon <= 7.0);
  CHECK(to_epsilon_delta(compose(one, T + 1), 1e-5).epsilon > 7.0);
}

TEST_CASE("SNLI preset step budget agrees with the quadrature oracle") {
  const PrivacySpec spec = preset(0.1, 0.4, 256, 550000, 7.0, 1e-5);
  const std::int64_t T = calibrate_steps(spec);
  const std::int64_t T_oracle = oracle_calibrate_steps(spec);
  CHECK(T == T_oracle);
  CHECK(T >= 1);
}

TEST_CASE("CIFAR10 preset step budget agrees with the quadrature oracle") {
  const PrivacySpec spec = preset(1.0, 2.0, 8192, 50000, 7.1, 1e-5);
  const std::int64_t T = calibrate_steps(spec);
  const std::int64_t T_oracle = oracle_calibrate_steps(spec);
  CHECK(T == T_oracle);
  CHECK(T >= 1);
}

TEST_CASE("calibrate_sigma satisfies its bracketing contract") {
  PrivacySpec spec = preset(0.1, 0.4, 256, 50000, 3.0, 1e-5);
  const std::int64_t T = 2000;
  const double sigma = calibrate_sigma(spec, T);
  auto eps_at = [&](double s) {
    return to_epsilon_delta(compose(single_step_curve(spec.sampling_q(), s), T),
                            spec.target_delta)
        .epsilon;
  };
  CHECK(eps_at(sigma) <= spec.target_epsilon);
  CHECK(eps_at(sigma - 1e-6) > spec.target_epsilon);
}

TEST_CASE("infeasible targets raise") {
  PrivacySpec spec = preset(0.1, 0.0, 256, 550000, 7.0, 1e-5);
  CHECK_THROWS_AS(calibrate_steps(spec), InfeasibleError);
  PrivacySpec tight = preset(0.1, 0.05, 500, 1000, 0.01, 1e-7);
  CHECK_THROWS_AS(calibrate_steps(tight), InfeasibleError);
}
