// Copyright 2026 The gradbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gradbench/nn.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/random.h"

namespace gradbench {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::size_t parse_dim(std::string_view token, std::string_view context) {
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
    throw ConfigError("bad layer dimension '" + std::string(token) + "' in '" +
                      std::string(context) + "'");
  }
  return value;
}

const char* activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kTanh:
      return "tanh";
    case ActivationKind::kRelu:
      return "relu";
    case ActivationKind::kSoftplus:
      return "softplus";
  }
  return "?";
}

double activation_value(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kTanh:
      return std::tanh(x);
    case ActivationKind::kRelu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::kSoftplus:
      return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return x;
}

// Rows of y for the loss; cross-entropy treats each row as one sample.
std::size_t batch_rows(const Tensor& y) { return y.rows(); }

bool is_class_index_target(const Tensor& y, const Tensor& target) {
  if (target.rows() != y.rows()) return false;
  if (target.rank() == 1) return true;
  return target.rank() == 2 && target.shape()[1] == 1 && y.cols() != 1;
}

std::size_t class_index(const Tensor& target, std::size_t row, std::size_t classes) {
  const double raw = target[row];
  if (!(raw >= 0.0) || raw != std::floor(raw) ||
      raw >= static_cast<double>(classes)) {
    throw ShapeError("invalid class index " + std::to_string(raw) + " for " +
                     std::to_string(classes) + " classes");
  }
  return static_cast<std::size_t>(raw);
}

// Per-row stabilized log-softmax pieces.
struct RowSoftmax {
  double max = 0.0;
  double log_norm = 0.0;  // log sum exp(y - max)
};

RowSoftmax row_softmax(std::span<const double> row, FlopCounter& fc) {
  RowSoftmax out;
  out.max = *std::max_element(row.begin(), row.end());
  double z = 0.0;
  for (double v : row) z += std::exp(v - out.max);
  out.log_norm = std::log(z);
  // compare, subtract, exp and add per element, then one log.
  fc.add(4 * row.size() + 1);
  return out;
}

}  // namespace

LayerSpec LayerSpec::linear(std::size_t in, std::size_t out, bool bias) {
  LayerSpec spec;
  spec.kind = LayerKind::kLinear;
  spec.in_dim = in;
  spec.out_dim = out;
  spec.bias = bias;
  return spec;
}

LayerSpec LayerSpec::act(ActivationKind kind) {
  LayerSpec spec;
  spec.kind = LayerKind::kActivation;
  spec.activation = kind;
  return spec;
}

std::size_t LayerSpec::num_params() const {
  if (kind != LayerKind::kLinear) return 0;
  return in_dim * out_dim + (bias ? out_dim : 0);
}

Model::Model(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("model needs at least one layer");
  if (layers_.front().kind != LayerKind::kLinear) {
    throw ShapeError("first layer must be linear to fix the input width");
  }
  std::size_t width = layers_.front().in_dim;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    if (spec.kind == LayerKind::kLinear) {
      if (spec.in_dim == 0 || spec.out_dim == 0) {
        throw ShapeError("layer " + std::to_string(i) + " has a zero dimension");
      }
      if (spec.in_dim != width) {
        throw ShapeError("layer " + std::to_string(i) + " expects width " +
                         std::to_string(spec.in_dim) + " but receives " +
                         std::to_string(width));
      }
      width = spec.out_dim;
    }
    widths_.push_back(width);
    layout_.push_back({num_params_, spec.num_params()});
    num_params_ += spec.num_params();
  }
  params.data.assign(num_params_, 0.0);
  params.offsets = layout_;
}

Model Model::parse(std::string_view spec) {
  std::vector<LayerSpec> layers;
  for (std::string_view raw : split(spec, ',')) {
    const std::string_view item = trim(raw);
    const auto fields = split(item, ':');
    const std::string_view kind = trim(fields[0]);
    if (kind == "linear") {
      if (fields.size() != 3 && fields.size() != 4) {
        throw ConfigError("expected linear:IN:OUT[:nobias], got '" +
                          std::string(item) + "'");
      }
      bool bias = true;
      if (fields.size() == 4) {
        if (trim(fields[3]) != "nobias") {
          throw ConfigError("unknown linear option '" + std::string(fields[3]) + "'");
        }
        bias = false;
      }
      layers.push_back(LayerSpec::linear(parse_dim(trim(fields[1]), item),
                                         parse_dim(trim(fields[2]), item), bias));
    } else if (fields.size() == 1 && kind == "tanh") {
      layers.push_back(LayerSpec::act(ActivationKind::kTanh));
    } else if (fields.size() == 1 && kind == "relu") {
      layers.push_back(LayerSpec::act(ActivationKind::kRelu));
    } else if (fields.size() == 1 && kind == "softplus") {
      layers.push_back(LayerSpec::act(ActivationKind::kSoftplus));
    } else {
      throw ConfigError("unknown layer '" + std::string(item) + "'");
    }
  }
  try {
    return Model(std::move(layers));
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("invalid model '") + std::string(spec) +
                      "': " + e.what());
  }
}

std::string Model::spec_string() const {
  std::string out;
  for (const LayerSpec& spec : layers_) {
    if (!out.empty()) out += ",";
    if (spec.kind == LayerKind::kLinear) {
      out += "linear:" + std::to_string(spec.in_dim) + ":" +
             std::to_string(spec.out_dim);
      if (!spec.bias) out += ":nobias";
    } else {
      out += activation_name(spec.activation);
    }
  }
  return out;
}

Tensor layer_forward(const LayerSpec& spec, std::span<const double> layer_params,
                     const Tensor& input, FlopCounter& fc) {
  if (spec.kind == LayerKind::kActivation) {
    Tensor out = input;
    for (double& v : out.data()) v = activation_value(spec.activation, v);
    fc.add(out.size());
    return out;
  }
  if (input.rank() != 2 || input.cols() != spec.in_dim) {
    throw ShapeError("linear layer expects batch x " + std::to_string(spec.in_dim) +
                     ", got " + shape_string(input.shape()));
  }
  if (layer_params.size() != spec.num_params()) {
    throw ShapeError("linear layer parameter slice has wrong length");
  }
  const std::size_t batch = input.rows();
  Tensor out({batch, spec.out_dim});
  gemm(input.data(), layer_params.first(spec.in_dim * spec.out_dim), out.data(),
       batch, spec.in_dim, spec.out_dim, fc);
  if (spec.bias) {
    const auto bias = layer_params.subspan(spec.in_dim * spec.out_dim);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < spec.out_dim; ++j) out.at(b, j) += bias[j];
    }
    fc.add(batch * spec.out_dim);
  }
  return out;
}

ForwardResult forward(const Model& model, std::span<const double> w,
                      const Tensor& x, FlopCounter& fc) {
  if (w.size() != model.num_params()) {
    throw ShapeError("parameter vector has length " + std::to_string(w.size()) +
                     ", model needs " + std::to_string(model.num_params()));
  }
  if (x.rank() != 2 || x.cols() != model.input_dim()) {
    throw ShapeError("input " + shape_string(x.shape()) + " does not match model "
                     "input width " + std::to_string(model.input_dim()));
  }
  ForwardResult result;
  result.activations.reserve(model.depth());
  const Tensor* current = &x;
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const ParamSlice slice = model.layout()[i];
    result.activations.push_back(layer_forward(
        model.layer(i), w.subspan(slice.start, slice.length), *current, fc));
    current = &result.activations.back();
    result.activation_units += current->size();
  }
  return result;
}

ForwardResult forward(const Model& model, const Tensor& x, FlopCounter& fc) {
  return forward(model, model.params.data, x, fc);
}

double activation_derivative(ActivationKind kind, double input, double output) {
  switch (kind) {
    case ActivationKind::kTanh:
      return 1.0 - output * output;
    case ActivationKind::kRelu:
      return input > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kSoftplus:
      return 1.0 / (1.0 + std::exp(-input));
  }
  return 1.0;
}

void validate_target(const LossSpec& spec, const Tensor& y, const Tensor& target) {
  if (spec.kind == LossKind::kMse) {
    if (target.shape() != y.shape()) {
      throw ShapeError("mse target " + shape_string(target.shape()) +
                       " does not match output " + shape_string(y.shape()));
    }
    return;
  }
  if (target.shape() == y.shape()) {
    for (double t : target.data()) {
      if (!(t >= 0.0)) throw ShapeError("cross-entropy target has a negative entry");
    }
    return;
  }
  if (!is_class_index_target(y, target)) {
    throw ShapeError("cross-entropy target " + shape_string(target.shape()) +
                     " fits neither output " + shape_string(y.shape()) +
                     " nor a class-index column");
  }
  for (std::size_t r = 0; r < y.rows(); ++r) class_index(target, r, y.cols());
}

double loss(const LossSpec& spec, const Tensor& y, const Tensor& target,
            FlopCounter& fc) {
  validate_target(spec, y, target);
  if (spec.kind == LossKind::kMse) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double diff = y[i] - target[i];
      acc += diff * diff;
    }
    fc.add(3 * y.size());
    return acc / static_cast<double>(y.size());
  }
  const std::size_t rows = batch_rows(y);
  const std::size_t classes = y.cols();
  const bool indices = target.shape() != y.shape();
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = y.data().subspan(r * classes, classes);
    const RowSoftmax sm = row_softmax(row, fc);
    double row_loss = 0.0;
    if (indices) {
      row_loss = sm.log_norm + sm.max - row[class_index(target, r, classes)];
      fc.add(2);
    } else {
      for (std::size_t c = 0; c < classes; ++c) {
        const double t = target.at(r, c);
        row_loss -= t * (row[c] - sm.max - sm.log_norm);
      }
      fc.add(4 * classes);
    }
    total += row_loss;
  }
  fc.add(rows);
  return total / static_cast<double>(rows);
}

double loss_with_gradient(const LossSpec& spec, const Tensor& y,
                          const Tensor& target, Tensor& grad, FlopCounter& fc) {
  const double value = loss(spec, y, target, fc);
  grad = Tensor(y.shape());
  if (spec.kind == LossKind::kMse) {
    const double k = 2.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) grad[i] = k * (y[i] - target[i]);
    fc.add(2 * y.size());
    return value;
  }
  const std::size_t rows = batch_rows(y);
  const std::size_t classes = y.cols();
  const bool indices = target.shape() != y.shape();
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = y.data().subspan(r * classes, classes);
    const RowSoftmax sm = row_softmax(row, fc);
    double mass = 1.0;
    if (!indices) {
      mass = 0.0;
      for (std::size_t c = 0; c < classes; ++c) mass += target.at(r, c);
    }
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(row[c] - sm.max - sm.log_norm);
      const double t = indices ? (c == class_index(target, r, classes) ? 1.0 : 0.0)
                               : target.at(r, c);
      grad.at(r, c) = (p * mass - t) * inv_rows;
    }
    fc.add(6 * classes);
  }
  return value;
}

double loss_tangent(const LossSpec& spec, const Tensor& y, const Tensor& dy,
                    const Tensor& target, double& value, FlopCounter& fc) {
  if (dy.shape() != y.shape()) {
    throw ShapeError("output tangent shape does not match output");
  }
  Tensor grad;
  value = loss_with_gradient(spec, y, target, grad, fc);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += grad[i] * dy[i];
  fc.add(2 * y.size());
  return acc;
}

std::vector<LayerTensors> unflatten(const Model& model, std::span<const double> w) {
  if (w.size() != model.num_params()) {
    throw ShapeError("cannot unflatten " + std::to_string(w.size()) +
                     " values into a model with " +
                     std::to_string(model.num_params()) + " parameters");
  }
  std::vector<LayerTensors> out(model.depth());
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const LayerSpec& spec = model.layer(i);
    if (spec.kind != LayerKind::kLinear) continue;
    const auto slice = w.subspan(model.layout()[i].start, model.layout()[i].length);
    const std::size_t nw = spec.in_dim * spec.out_dim;
    out[i].weight = Tensor({spec.in_dim, spec.out_dim},
                           std::vector<double>(slice.begin(), slice.begin() + nw));
    if (spec.bias) {
      out[i].bias = Tensor({spec.out_dim},
                           std::vector<double>(slice.begin() + nw, slice.end()));
    }
  }
  return out;
}

ParamVector flatten(const Model& model, const std::vector<LayerTensors>& layers) {
  if (layers.size() != model.depth()) {
    throw ShapeError("flatten needs one entry per layer");
  }
  ParamVector out;
  out.offsets = model.layout();
  out.data.reserve(model.num_params());
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const LayerSpec& spec = model.layer(i);
    if (spec.kind != LayerKind::kLinear) continue;
    if (!layers[i].weight ||
        layers[i].weight->shape() != std::vector<std::size_t>{spec.in_dim, spec.out_dim}) {
      throw ShapeError("layer " + std::to_string(i) + " weight has the wrong shape");
    }
    const auto wdata = layers[i].weight->data();
    out.data.insert(out.data.end(), wdata.begin(), wdata.end());
    if (spec.bias) {
      if (!layers[i].bias || layers[i].bias->size() != spec.out_dim) {
        throw ShapeError("layer " + std::to_string(i) + " bias has the wrong shape");
      }
      const auto bdata = layers[i].bias->data();
      out.data.insert(out.data.end(), bdata.begin(), bdata.end());
    }
  }
  return out;
}

ParamVector init_params(const Model& model, std::uint64_t seed) {
  ParamVector out;
  out.offsets = model.layout();
  out.data.assign(model.num_params(), 0.0);
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const LayerSpec& spec = model.layer(i);
    if (spec.kind != LayerKind::kLinear) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in_dim));
    const ParamSlice slice = model.layout()[i];
    fill_uniform(seed, slice.start,
                 std::span<double>(out.data).subspan(slice.start, slice.length),
                 -bound, bound);
  }
  return out;
}

}  // namespace gradbench
