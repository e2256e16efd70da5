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

#include "dpopt/stats.hpp"

#include <algorithm>
#include <cmath>

#include "dpopt/error.hpp"

namespace dpopt {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> copy(values.begin(), values.end());
  std::sort(copy.begin(), copy.end());
  return quantile_sorted(copy, p);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw InputError("summarize of empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.min = sorted.front();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.50);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.max = sorted.back();
  // summed in sorted order so the result is permutation invariant
  s.mean = mean(sorted);
  return s;
}

Histogram histogram(std::span<const double> values, std::size_t bins,
                    HistTransform transform) {
  if (values.empty()) throw InputError("histogram of empty sample");
  if (bins < 1) throw InputError("histogram needs bins >= 1");

  std::vector<double> tv(values.begin(), values.end());
  double lo = 0.0, hi = 0.0;
  switch (transform) {
    case HistTransform::kIdentity:
      lo = *std::min_element(tv.begin(), tv.end());
      hi = *std::max_element(tv.begin(), tv.end());
      break;
    case HistTransform::kSqrt:
      for (double& v : tv) {
        if (v < 0.0) throw InputError("sqrt transform needs non-negative values");
        v = std::sqrt(v);
      }
      lo = *std::min_element(tv.begin(), tv.end());
      hi = *std::max_element(tv.begin(), tv.end());
      break;
    case HistTransform::kSignedRescale: {
      double amax = 0.0;
      for (double v : tv) amax = std::max(amax, std::fabs(v));
      if (amax > 0.0)
        for (double& v : tv) v /= amax;
      lo = -1.0;
      hi = 1.0;
      break;
    }
  }
  if (lo == hi) {  // degenerate range: one unit-wide bin span around the value
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : tv) {
    auto idx = static_cast<std::int64_t>((v - lo) / width);
    if (idx < 0) idx = 0;
    if (idx >= static_cast<std::int64_t>(bins)) idx = static_cast<std::int64_t>(bins) - 1;
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InputError("mean of empty sample");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) throw InputError("stddev needs at least two samples");
  const double mu = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace dpopt
