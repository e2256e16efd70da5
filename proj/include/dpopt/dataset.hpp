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

#ifndef DPOPT_DATASET_HPP_
#define DPOPT_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace dpopt {

// Dense row-major matrix of 64-bit floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }
};

enum class TaskKind { kRegression, kClassification, kSignDescentStress };

TaskKind parse_task(const std::string& name);
std::string task_name(TaskKind task);

struct Dataset {
  Matrix features;             // N x p
  std::vector<double> labels;  // length N; class index for classification
  bool classification = false;
  int n_classes = 0;

  std::size_t n_examples() const { return features.rows; }
  std::size_t n_features() const { return features.cols; }
};

// Constants of the sign-descent-stress generator. The per-coordinate
// population gradient magnitudes at theta = 0 are log-spaced over
// [sqrt(0.1 * kStressPhiRef), sqrt(10 * kStressPhiRef)] on the signal block.
// The trailing ~10% of coordinates form a high-curvature, zero-signal block
// whose gradients have mean zero and tight variance; they probe the
// low-signal regime where the update scale is set by the denominator floor.
// The scales are chosen against the bundled stress preset
// (B=256, C=0.02, sigma=2.0, N=1000), for which Phi equals kStressPhiRef.
inline constexpr double kStressPhiRef = 2.44140625e-8;
inline constexpr double kStressDistance = 1.0;      // |w*_i| on the signal block
inline constexpr double kStressSignalNoise = 0.14;  // label noise, signal block
inline constexpr double kStressStiffNoise = 1e-3;   // label noise, stiff block
inline constexpr double kStressStiffScaleSq = 30.0;  // a^2 of stiff features

// Number of trailing stiff coordinates for a stress task of width p.
std::size_t stress_stiff_count(std::size_t p);

// Per-coordinate population-gradient magnitude (|mean over the full dataset
// of the per-example gradient| at theta = 0) the generator is built to
// produce: log-spaced on the signal block, exactly 0 on the stiff block.
std::vector<double> stress_signal_magnitudes(std::size_t p);

// Deterministic synthetic datasets.
//   kRegression:         x ~ N(0,1)^p, y = x.w* + 0.1 eps
//   kClassification:     x ~ N(0,1)^p, y = Bernoulli(sigmoid(3 x.w*)) in {0,1}
//   kSignDescentStress:  scaled one-hot groups, see constants above
Dataset make_synthetic(TaskKind task, std::size_t n, std::size_t p,
                       std::uint64_t seed);

// CSV import/export: header row f0..f{p-1},label; features then label column.
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace dpopt

#endif  // DPOPT_DATASET_HPP_
