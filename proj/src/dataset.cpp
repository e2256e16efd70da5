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

#include "dpopt/dataset.hpp"

#include <cmath>
#include <fstream>

#include "dpopt/csvio.hpp"
#include "dpopt/error.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

TaskKind parse_task(const std::string& name) {
  if (name == "regression") return TaskKind::kRegression;
  if (name == "classification") return TaskKind::kClassification;
  if (name == "sign-descent-stress") return TaskKind::kSignDescentStress;
  throw ConfigError("unknown task '" + name + "'");
}

std::string task_name(TaskKind task) {
  switch (task) {
    case TaskKind::kRegression: return "regression";
    case TaskKind::kClassification: return "classification";
    case TaskKind::kSignDescentStress: return "sign-descent-stress";
  }
  return "?";
}

std::size_t stress_stiff_count(std::size_t p) {
  return p >= 10 ? p / 10 : (p >= 2 ? 1 : 0);
}

std::vector<double> stress_signal_magnitudes(std::size_t p) {
  const std::size_t n_stiff = stress_stiff_count(p);
  const std::size_t n_sig = p - n_stiff;
  std::vector<double> s(p, 0.0);
  const double base = std::sqrt(kStressPhiRef);
  for (std::size_t i = 0; i < n_sig; ++i) {
    const double expo =
        n_sig > 1 ? -0.5 + static_cast<double>(i) / static_cast<double>(n_sig - 1)
                  : -0.5;
    s[i] = base * std::pow(10.0, expo);
  }
  return s;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Dataset make_regression(std::size_t n, std::size_t p, std::uint64_t seed) {
  StepRng rng(seed, Stream::kData, 0);
  Dataset ds;
  ds.features = Matrix(n, p);
  ds.labels.resize(n);
  std::vector<double> w(p);
  for (std::size_t j = 0; j < p; ++j)
    w[j] = rng.gaussian() / std::sqrt(static_cast<double>(p));
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double x = rng.gaussian();
      ds.features.at(i, j) = x;
      dot += x * w[j];
    }
    ds.labels[i] = dot + 0.1 * rng.gaussian();
  }
  return ds;
}

Dataset make_classification(std::size_t n, std::size_t p, std::uint64_t seed) {
  StepRng rng(seed, Stream::kData, 0);
  Dataset ds;
  ds.features = Matrix(n, p);
  ds.labels.resize(n);
  ds.classification = true;
  ds.n_classes = 2;
  std::vector<double> w(p);
  for (std::size_t j = 0; j < p; ++j)
    w[j] = 3.0 * rng.gaussian() / std::sqrt(static_cast<double>(p));
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double x = rng.gaussian();
      ds.features.at(i, j) = x;
      dot += x * w[j];
    }
    ds.labels[i] = rng.uniform() < sigmoid(dot) ? 1.0 : 0.0;
  }
  return ds;
}

// One scaled one-hot group per coordinate, examples assigned round-robin.
// Coordinate i of the signal block has feature scale a_i = sqrt(p s_i / D)
// and target a_i w*_i, so the full-data mean gradient of the squared loss at
// theta = 0 is exactly -(N_i/N) a_i^2 w*_i, of magnitude s_i when p | n.
// Label noise is centered within each group to keep that identity exact.
Dataset make_stress(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (p < 2) throw ConfigError("sign-descent-stress needs p >= 2");
  if (n < p) throw ConfigError("sign-descent-stress needs n >= p");
  StepRng rng(seed, Stream::kData, 0);
  const std::size_t n_stiff = stress_stiff_count(p);
  const std::size_t n_sig = p - n_stiff;
  const std::vector<double> s = stress_signal_magnitudes(p);

  std::vector<double> scale(p), wstar(p), noise_sd(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (i < n_sig) {
      scale[i] = std::sqrt(static_cast<double>(p) * s[i] / kStressDistance);
      wstar[i] = (i % 2 == 0) ? kStressDistance : -kStressDistance;
      noise_sd[i] = kStressSignalNoise;
    } else {
      scale[i] = std::sqrt(kStressStiffScaleSq);
      wstar[i] = 0.0;
      noise_sd[i] = kStressStiffNoise;
    }
  }

  Dataset ds;
  ds.features = Matrix(n, p);
  ds.labels.resize(n);
  std::vector<double> eps(n);
  std::vector<double> group_sum(p, 0.0);
  std::vector<std::size_t> group_count(p, 0);
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t g = e % p;
    eps[e] = noise_sd[g] * rng.gaussian();
    group_sum[g] += eps[e];
    ++group_count[g];
  }
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t g = e % p;
    const double centered = eps[e] - group_sum[g] / static_cast<double>(group_count[g]);
    ds.features.at(e, g) = scale[g];
    ds.labels[e] = scale[g] * wstar[g] + centered;
  }
  return ds;
}

}  // namespace

Dataset make_synthetic(TaskKind task, std::size_t n, std::size_t p,
                       std::uint64_t seed) {
  if (n < 1 || p < 1) throw ConfigError("need n >= 1 and p >= 1");
  switch (task) {
    case TaskKind::kRegression: return make_regression(n, p, seed);
    case TaskKind::kClassification: return make_classification(n, p, seed);
    case TaskKind::kSignDescentStress: return make_stress(n, p, seed);
  }
  throw ConfigError("bad task");
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path);
  CsvWriter w(out);
  std::vector<std::string> header;
  for (std::size_t j = 0; j < ds.n_features(); ++j)
    header.push_back("f" + std::to_string(j));
  header.push_back("label");
  w.row(header);
  for (std::size_t i = 0; i < ds.n_examples(); ++i) {
    std::vector<std::string> cells;
    for (std::size_t j = 0; j < ds.n_features(); ++j)
      cells.push_back(format_double(ds.features.at(i, j)));
    cells.push_back(format_double(ds.labels[i]));
    w.row(cells);
  }
}

Dataset read_dataset_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2) throw InputError("dataset CSV needs header and data rows");
  const std::size_t cols = rows[0].size();
  if (cols < 2) throw InputError("dataset CSV needs features and a label column");
  Dataset ds;
  const std::size_t n = rows.size() - 1;
  const std::size_t p = cols - 1;
  ds.features = Matrix(n, p);
  ds.labels.resize(n);
  bool all_binary = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    if (r.size() != cols) throw InputError("ragged dataset CSV row");
    for (std::size_t j = 0; j < p; ++j) {
      const double v = parse_double(r[j]);
      if (!std::isfinite(v)) throw InputError("non-finite feature value");
      ds.features.at(i, j) = v;
    }
    ds.labels[i] = parse_double(r[p]);
    if (ds.labels[i] != 0.0 && ds.labels[i] != 1.0) all_binary = false;
  }
  if (all_binary) {
    ds.classification = true;
    ds.n_classes = 2;
  }
  return ds;
}

}  // namespace dpopt
