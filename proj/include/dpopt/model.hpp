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

#ifndef DPOPT_MODEL_HPP_
#define DPOPT_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpopt/dataset.hpp"

namespace dpopt {

// Tiny hand-differentiated models. Losses per example:
//   linear-regression:   0.5 (theta.x - y)^2
//   logistic-regression: binary cross-entropy on sigmoid(theta.x)
//   mlp:                 softmax cross-entropy, tanh hidden layers
enum class ModelKind { kLinearRegression, kLogisticRegression, kMlp };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct Model {
  ModelKind kind = ModelKind::kLinearRegression;
  // Layer widths including input and output: {p} for linear/logistic,
  // {p, h1, ..., k} for the MLP (k >= 2 classes).
  std::vector<std::size_t> layers;
  std::vector<double> params;  // theta, flat

  std::size_t n_features() const { return layers.front(); }
  std::size_t dim() const { return params.size(); }
};

// layers = {p} for linear/logistic; MLP needs at least {p, h, k}.
Model make_model(ModelKind kind, const std::vector<std::size_t>& layers);

std::size_t param_count(ModelKind kind, const std::vector<std::size_t>& layers);

// Gaussian init scaled by 1/sqrt(fan_in) per layer (zeros for the
// linear models' default start is obtained with scale = 0).
void init_params(Model& model, std::uint64_t seed, double scale);

struct PerExampleGrads {
  Matrix grads;  // b x d, one row per example in the slice
  std::size_t batch_size_realized = 0;
};

// Exact analytic per-example gradients at the model's current parameters.
PerExampleGrads per_example_grads(const Model& model, const Dataset& data,
                                  std::span<const std::size_t> idx);

// Mean per-example loss over the slice (all rows when idx is empty and
// use_all is true).
double loss(const Model& model, const Dataset& data,
            std::span<const std::size_t> idx);
double loss_full(const Model& model, const Dataset& data);

// Classification accuracy on the full dataset (throws for regression models).
double accuracy_full(const Model& model, const Dataset& data);

}  // namespace dpopt

#endif  // DPOPT_MODEL_HPP_
