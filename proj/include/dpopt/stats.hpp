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

#ifndef DPOPT_STATS_HPP_
#define DPOPT_STATS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpopt {

// Six-number summary: min, Q1, median, Q3, max, mean.
struct SummaryStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Quantile of a SORTED sample, linear interpolation between order
// statistics: position h = (n-1)p, value x[floor(h)] + frac(h) * diff.
double quantile_sorted(std::span<const double> sorted, double p);

// Quantile of an unsorted sample (copies and sorts).
double quantile(std::span<const double> values, double p);

SummaryStats summarize(std::span<const double> values);

enum class HistTransform { kIdentity, kSqrt, kSignedRescale };

struct Histogram {
  std::vector<double> edges;       // bins+1 ascending edges
  std::vector<std::int64_t> counts;  // per-bin counts, sum = input size
};

// Equal-width histogram of the transformed values. kSqrt takes sqrt of each
// value (inputs must be >= 0); kSignedRescale divides by max |value| so the
// binned range is exactly [-1, 1]. The rightmost bin is closed on both ends.
Histogram histogram(std::span<const double> values, std::size_t bins,
                    HistTransform transform = HistTransform::kIdentity);

double mean(std::span<const double> values);
// Sample standard deviation (ddof = 1).
double sample_stddev(std::span<const double> values);

}  // namespace dpopt

#endif  // DPOPT_STATS_HPP_
