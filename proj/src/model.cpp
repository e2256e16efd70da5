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

#include "dpopt/model.hpp"

#include <cmath>
#include <numeric>

#include "dpopt/error.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear-regression") return ModelKind::kLinearRegression;
  if (name == "logistic-regression") return ModelKind::kLogisticRegression;
  if (name == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model kind '" + name + "'");
}

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearRegression: return "linear-regression";
    case ModelKind::kLogisticRegression: return "logistic-regression";
    case ModelKind::kMlp: return "mlp";
  }
  return "?";
}

std::size_t param_count(ModelKind kind, const std::vector<std::size_t>& layers) {
  if (layers.empty()) throw ConfigError("model needs at least an input width");
  if (kind != ModelKind::kMlp) return layers.front();
  if (layers.size() < 2) throw ConfigError("mlp needs hidden/output layers");
  std::size_t d = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    d += layers[l] * layers[l + 1] + layers[l + 1];
  return d;
}

Model make_model(ModelKind kind, const std::vector<std::size_t>& layers) {
  Model m;
  m.kind = kind;
  m.layers = layers;
  if (kind == ModelKind::kMlp && layers.back() < 2)
    throw ConfigError("mlp output layer needs >= 2 classes");
  m.params.assign(param_count(kind, layers), 0.0);
  return m;
}

void init_params(Model& model, std::uint64_t seed, double scale) {
  if (scale == 0.0) {
    std::fill(model.params.begin(), model.params.end(), 0.0);
    return;
  }
  StepRng rng(seed, Stream::kInit, 0);
  if (model.kind != ModelKind::kMlp) {
    for (double& w : model.params)
      w = scale * rng.gaussian() / std::sqrt(static_cast<double>(model.n_features()));
    return;
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    const std::size_t fan_in = model.layers[l];
    const std::size_t fan_out = model.layers[l + 1];
    const double sd = scale / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i)
      model.params[off++] = sd * rng.gaussian();
    for (std::size_t i = 0; i < fan_out; ++i) model.params[off++] = 0.0;
  }
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double dot_row(const Model& m, const Dataset& d, std::size_t row) {
  const double* x = d.features.row(row);
  double acc = 0.0;
  for (std::size_t j = 0; j < d.n_features(); ++j) acc += m.params[j] * x[j];
  return acc;
}

void check_shapes(const Model& m, const Dataset& d) {
  if (m.n_features() != d.n_features())
    throw ShapeError("model expects p=" + std::to_string(m.n_features()) +
                     ", dataset has p=" + std::to_string(d.n_features()));
  if (m.kind == ModelKind::kMlp || m.kind == ModelKind::kLogisticRegression) {
    const int k = m.kind == ModelKind::kMlp ? static_cast<int>(m.layers.back()) : 2;
    for (double y : d.labels) {
      if (y != std::floor(y) || y < 0.0 || y >= static_cast<double>(k))
        throw ShapeError("class label out of range for model");
    }
  }
}

// MLP forward pass storing activations, then backprop for one example.
// Layout per layer: W (out x in, row-major), then b (out).
struct MlpWork {
  std::vector<std::vector<double>> act;  // act[0] = input, act[L] = logits
};

void mlp_forward(const Model& m, const double* x, MlpWork& work) {
  const auto& L = m.layers;
  work.act.assign(L.size(), {});
  work.act[0].assign(x, x + L[0]);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < L.size(); ++l) {
    const std::size_t in = L[l], out = L[l + 1];
    work.act[l + 1].assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double z = m.params[off + in * out + o];  // bias
      const double* wrow = &m.params[off + o * in];
      for (std::size_t i = 0; i < in; ++i) z += wrow[i] * work.act[l][i];
      const bool last = (l + 2 == L.size());
      work.act[l + 1][o] = last ? z : std::tanh(z);
    }
    off += in * out + out;
  }
}

double mlp_loss_from_logits(const std::vector<double>& logits, std::size_t label) {
  double zmax = logits[0];
  for (double z : logits) zmax = std::max(zmax, z);
  double lse = 0.0;
  for (double z : logits) lse += std::exp(z - zmax);
  return std::log(lse) + zmax - logits[label];
}

void mlp_backward(const Model& m, const MlpWork& work, std::size_t label,
                  double* grad_out) {
  const auto& L = m.layers;
  const std::size_t n_layers = L.size() - 1;
  // softmax - onehot at the output
  const auto& logits = work.act[n_layers];
  double zmax = logits[0];
  for (double z : logits) zmax = std::max(zmax, z);
  double lse = 0.0;
  for (double z : logits) lse += std::exp(z - zmax);
  std::vector<double> delta(logits.size());
  for (std::size_t o = 0; o < logits.size(); ++o)
    delta[o] = std::exp(logits[o] - zmax) / lse - (o == label ? 1.0 : 0.0);

  // walk layers backwards; offsets recomputed per layer
  std::vector<std::size_t> offs(n_layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offs[l] = off;
    off += L[l] * L[l + 1] + L[l + 1];
  }
  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t in = L[l], out = L[l + 1];
    const std::size_t o0 = offs[l];
    for (std::size_t o = 0; o < out; ++o) {
      for (std::size_t i = 0; i < in; ++i)
        grad_out[o0 + o * in + i] = delta[o] * work.act[l][i];
      grad_out[o0 + in * out + o] = delta[o];
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t i = 0; i < in; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < out; ++o)
        acc += m.params[o0 + o * in + i] * delta[o];
      // through tanh: act[l] holds tanh(z)
      prev[i] = acc * (1.0 - work.act[l][i] * work.act[l][i]);
    }
    delta = std::move(prev);
  }
}

}  // namespace

PerExampleGrads per_example_grads(const Model& model, const Dataset& data,
                                  std::span<const std::size_t> idx) {
  check_shapes(model, data);
  PerExampleGrads out;
  out.batch_size_realized = idx.size();
  out.grads = Matrix(idx.size(), model.dim());
  MlpWork work;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const std::size_t e = idx[r];
    if (e >= data.n_examples()) throw ShapeError("example index out of range");
    double* g = out.grads.row(r);
    switch (model.kind) {
      case ModelKind::kLinearRegression: {
        const double resid = dot_row(model, data, e) - data.labels[e];
        const double* x = data.features.row(e);
        for (std::size_t j = 0; j < data.n_features(); ++j) g[j] = resid * x[j];
        break;
      }
      case ModelKind::kLogisticRegression: {
        const double s = sigmoid(dot_row(model, data, e));
        const double coef = s - data.labels[e];
        const double* x = data.features.row(e);
        for (std::size_t j = 0; j < data.n_features(); ++j) g[j] = coef * x[j];
        break;
      }
      case ModelKind::kMlp: {
        mlp_forward(model, data.features.row(e), work);
        mlp_backward(model, work, static_cast<std::size_t>(data.labels[e]), g);
        break;
      }
    }
  }
  return out;
}

double loss(const Model& model, const Dataset& data,
            std::span<const std::size_t> idx) {
  check_shapes(model, data);
  if (idx.empty()) throw InputError("loss over an empty slice");
  double acc = 0.0;
  MlpWork work;
  for (std::size_t e : idx) {
    if (e >= data.n_examples()) throw ShapeError("example index out of range");
    switch (model.kind) {
      case ModelKind::kLinearRegression: {
        const double resid = dot_row(model, data, e) - data.labels[e];
        acc += 0.5 * resid * resid;
        break;
      }
      case ModelKind::kLogisticRegression: {
        const double z = dot_row(model, data, e);
        acc += softplus(z) - data.labels[e] * z;
        break;
      }
      case ModelKind::kMlp: {
        mlp_forward(model, data.features.row(e), work);
        acc += mlp_loss_from_logits(work.act.back(),
                                    static_cast<std::size_t>(data.labels[e]));
        break;
      }
    }
  }
  return acc / static_cast<double>(idx.size());
}

double loss_full(const Model& model, const Dataset& data) {
  std::vector<std::size_t> all(data.n_examples());
  std::iota(all.begin(), all.end(), 0);
  return loss(model, data, all);
}

double accuracy_full(const Model& model, const Dataset& data) {
  check_shapes(model, data);
  if (model.kind == ModelKind::kLinearRegression)
    throw InputError("accuracy undefined for regression model");
  std::size_t hits = 0;
  MlpWork work;
  for (std::size_t e = 0; e < data.n_examples(); ++e) {
    std::size_t pred = 0;
    if (model.kind == ModelKind::kLogisticRegression) {
      pred = dot_row(model, data, e) > 0.0 ? 1 : 0;
    } else {
      mlp_forward(model, data.features.row(e), work);
      const auto& logits = work.act.back();
      for (std::size_t o = 1; o < logits.size(); ++o)
        if (logits[o] > logits[pred]) pred = o;
    }
    if (static_cast<double>(pred) == data.labels[e]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.n_examples());
}

}  // namespace dpopt
