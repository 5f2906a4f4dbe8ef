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

// Feed-forward chains of layers, their losses, and flat parameter access.
//
// A model is a chain y_i = f_i(w_i, y_{i-1}) with y_0 = x. Every layer output
// is one checkpointable boundary, so the depth D equals the number of layers.
// Linear layers compute y = x W + b with W stored row-major (in x out)
// followed by b. The batch is the leading dimension of x.

#ifndef GRADBENCH_NN_H_
#define GRADBENCH_NN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradbench/tensor.h"

namespace gradbench {

enum class LayerKind { kLinear, kActivation };
enum class ActivationKind { kTanh, kRelu, kSoftplus };

struct LayerSpec {
  LayerKind kind = LayerKind::kLinear;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  bool bias = true;
  ActivationKind activation = ActivationKind::kTanh;

  static LayerSpec linear(std::size_t in, std::size_t out, bool bias = true);
  static LayerSpec act(ActivationKind kind);

  std::size_t num_params() const;
  bool operator==(const LayerSpec&) const = default;
};

struct ParamSlice {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const ParamSlice&) const = default;
};

struct ParamVector {
  std::vector<double> data;
  std::vector<ParamSlice> offsets;  // one per layer, zero length for activations

  std::size_t size() const { return data.size(); }
  std::span<double> layer(std::size_t i) {
    return std::span<double>(data).subspan(offsets[i].start, offsets[i].length);
  }
  std::span<const double> layer(std::size_t i) const {
    return std::span<const double>(data).subspan(offsets[i].start,
                                                 offsets[i].length);
  }
};

class Model {
 public:
  // Validates that layer widths chain; the first layer must be linear.
  explicit Model(std::vector<LayerSpec> layers);

  // "linear:2:32,tanh,linear:32:4"; append ":nobias" to drop a bias.
  static Model parse(std::string_view spec);
  std::string spec_string() const;

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(std::size_t i) const { return layers_[i]; }
  std::size_t depth() const { return layers_.size(); }
  std::size_t num_params() const { return num_params_; }
  std::size_t input_dim() const { return layers_.front().in_dim; }
  std::size_t output_dim() const { return widths_.back(); }
  // Feature width of the output of layer i.
  std::size_t width(std::size_t i) const { return widths_[i]; }
  const std::vector<ParamSlice>& layout() const { return layout_; }

  // Parameters; zero-filled with the right layout until init_params is used.
  ParamVector params;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> widths_;
  std::vector<ParamSlice> layout_;
  std::size_t num_params_ = 0;
};

struct Batch {
  Tensor x;       // batch x in_dim
  Tensor target;  // same shape as the output, or class indices for cross-entropy
};

enum class LossKind { kMse, kCrossEntropy };

struct LossSpec {
  LossKind kind = LossKind::kMse;
};

// ---------------------------------------------------------------------------
// Forward evaluation

struct ForwardResult {
  std::vector<Tensor> activations;  // y_1 .. y_p
  std::size_t activation_units = 0;  // scalars retained in `activations`

  const Tensor& output() const { return activations.back(); }
};

// One layer. `layer_params` is that layer's slice of the flat vector.
Tensor layer_forward(const LayerSpec& spec, std::span<const double> layer_params,
                     const Tensor& input, FlopCounter& fc);

// Runs the chain and keeps every intermediate activation.
ForwardResult forward(const Model& model, std::span<const double> w,
                      const Tensor& x, FlopCounter& fc);
ForwardResult forward(const Model& model, const Tensor& x, FlopCounter& fc);

// d f_i / d input elementwise, from the activation's input and output.
double activation_derivative(ActivationKind kind, double input, double output);

// ---------------------------------------------------------------------------
// Losses. All losses mean-reduce over the batch (mse over every element).

double loss(const LossSpec& spec, const Tensor& y, const Tensor& target,
            FlopCounter& fc);

// Returns the loss and writes dL/dy into `grad` (resized to y's shape).
double loss_with_gradient(const LossSpec& spec, const Tensor& y,
                          const Tensor& target, Tensor& grad, FlopCounter& fc);

// Returns dL along the output tangent dy; `value` receives the loss.
double loss_tangent(const LossSpec& spec, const Tensor& y, const Tensor& dy,
                    const Tensor& target, double& value, FlopCounter& fc);

// Throws ShapeError if `target` does not fit `y` for this loss.
void validate_target(const LossSpec& spec, const Tensor& y, const Tensor& target);

// ---------------------------------------------------------------------------
// Parameters

struct LayerTensors {
  std::optional<Tensor> weight;  // in x out, linear layers only
  std::optional<Tensor> bias;
  bool operator==(const LayerTensors&) const = default;
};

std::vector<LayerTensors> unflatten(const Model& model, std::span<const double> w);
ParamVector flatten(const Model& model, const std::vector<LayerTensors>& layers);

// Uniform in +-1/sqrt(in_dim) per linear layer (weights and bias), seeded.
ParamVector init_params(const Model& model, std::uint64_t seed);

}  // namespace gradbench

#endif  // GRADBENCH_NN_H_
