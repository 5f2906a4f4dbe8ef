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

#include "gradbench/reverse_ad.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gradbench/errors.h"

namespace gradbench {
namespace {

std::span<const double> layer_slice(const Model& model, std::span<const double> w,
                                    std::size_t i) {
  return w.subspan(model.layout()[i].start, model.layout()[i].length);
}

std::span<double> layer_slice(const Model& model, std::span<double> g,
                              std::size_t i) {
  return g.subspan(model.layout()[i].start, model.layout()[i].length);
}

void check_inputs(const Model& model, std::span<const double> w,
                  const Batch& batch) {
  if (w.size() != model.num_params()) {
    throw ShapeError("parameter vector has length " + std::to_string(w.size()) +
                     ", model needs " + std::to_string(model.num_params()));
  }
  if (batch.x.rank() != 2 || batch.x.cols() != model.input_dim()) {
    throw ShapeError("batch input " + shape_string(batch.x.shape()) +
                     " does not match model input width " +
                     std::to_string(model.input_dim()));
  }
}

double loss_gradient_or_throw(const LossSpec& spec, const Tensor& y,
                              const Batch& batch, Tensor& dy, FlopCounter& fc) {
  const double value = loss_with_gradient(spec, y, batch.target, dy, fc);
  if (!std::isfinite(value)) {
    throw OverflowError("non-finite loss during backpropagation");
  }
  return value;
}

}  // namespace

CheckpointPlan CheckpointPlan::for_depth(std::size_t depth, std::size_t segment_size) {
  if (depth == 0) throw ShapeError("checkpoint plan needs a positive depth");
  if (segment_size == 0) {
    segment_size = 1;
    while (segment_size * segment_size < depth) ++segment_size;
  }
  if (segment_size > depth) {
    throw ShapeError("segment size " + std::to_string(segment_size) + " exceeds depth " +
                     std::to_string(depth));
  }
  CheckpointPlan plan;
  plan.segment_size = segment_size;
  for (std::size_t b = 0; b < depth; b += segment_size) plan.boundaries.push_back(b);
  return plan;
}

void CheckpointPlan::validate(std::size_t depth) const {
  if (segment_size == 0) throw ShapeError("segment size must be positive");
  if (boundaries.empty() || boundaries.front() != 0) {
    throw ShapeError("checkpoint boundaries must start at layer 0");
  }
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    const std::size_t end = k + 1 < boundaries.size() ? boundaries[k + 1] : depth;
    if (end <= boundaries[k] || end - boundaries[k] > segment_size) {
      throw ShapeError("checkpoint segment " + std::to_string(k) +
                       " is empty or longer than the segment size");
    }
  }
}

Tensor layer_backward(const LayerSpec& spec, std::span<const double> layer_params,
                      const Tensor& input, const Tensor& output, const Tensor& dy,
                      std::span<double> grad, FlopCounter& fc) {
  if (spec.kind == LayerKind::kActivation) {
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dx.size(); ++i) {
      dx[i] = dy[i] * activation_derivative(spec.activation, input[i], output[i]);
    }
    fc.add(2 * dx.size());
    return dx;
  }
  const std::size_t batch = input.rows();
  const std::size_t in = spec.in_dim;
  const std::size_t out = spec.out_dim;
  const auto weight = layer_params.first(in * out);

  // dW = x^T dy
  const Tensor xt = transpose(input);
  gemm(xt.data(), dy.data(), grad.first(in * out), in, batch, out, fc);
  if (spec.bias) {
    auto db = grad.subspan(in * out, out);
    std::fill(db.begin(), db.end(), 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < out; ++j) db[j] += dy.at(b, j);
    }
    fc.add(batch * out);
  }
  // dx = dy W^T
  std::vector<double> wt(in * out);
  for (std::size_t i = 0; i < in; ++i) {
    for (std::size_t j = 0; j < out; ++j) wt[j * in + i] = weight[i * out + j];
  }
  Tensor dx({batch, in});
  gemm(dy.data(), wt, dx.data(), batch, out, in, fc);
  return dx;
}

GradEstimate backward_vanilla(const Model& model, std::span<const double> w,
                              const Batch& batch, const LossSpec& loss_spec,
                              FlopCounter& fc) {
  check_inputs(model, w, batch);
  const std::uint64_t start = fc.total();
  const ForwardResult fr = forward(model, w, batch.x, fc);

  GradEstimate est;
  est.method = "bp-vanilla";
  est.g.assign(model.num_params(), 0.0);
  Tensor dy;
  est.loss = loss_gradient_or_throw(loss_spec, fr.output(), batch, dy, fc);
  for (std::size_t i = model.depth(); i-- > 0;) {
    const Tensor& input = i == 0 ? batch.x : fr.activations[i - 1];
    dy = layer_backward(model.layer(i), layer_slice(model, w, i), input,
                        fr.activations[i], dy, layer_slice(model, std::span(est.g), i),
                        fc);
  }
  est.peak_activation_units = fr.activation_units;
  est.flops = fc.total() - start;
  return est;
}

GradEstimate backward_vanilla(const Model& model, const Batch& batch,
                              const LossSpec& loss_spec, FlopCounter& fc) {
  return backward_vanilla(model, model.params.data, batch, loss_spec, fc);
}

GradEstimate backward_checkpointed(const Model& model, std::span<const double> w,
                                   const Batch& batch, const LossSpec& loss_spec,
                                   const CheckpointPlan& plan, FlopCounter& fc) {
  check_inputs(model, w, batch);
  plan.validate(model.depth());
  const std::uint64_t start = fc.total();
  const std::size_t segments = plan.num_segments();
  auto segment_end = [&](std::size_t k) {
    return k + 1 < segments ? plan.boundaries[k + 1] : model.depth();
  };

  ActivationMeter meter;
  std::vector<Tensor> checkpoints;
  checkpoints.reserve(segments);
  Tensor current = batch.x;
  bool current_held = false;
  for (std::size_t k = 0; k < segments; ++k) {
    for (std::size_t i = plan.boundaries[k]; i < segment_end(k); ++i) {
      Tensor next = layer_forward(model.layer(i), layer_slice(model, w, i), current, fc);
      meter.hold(next.size());
      if (current_held) meter.release(current.size());
      current = std::move(next);
      current_held = true;
    }
    checkpoints.push_back(current);
    current_held = false;  // now owned by the checkpoint list
  }

  GradEstimate est;
  est.method = "bp-checkpointing";
  est.g.assign(model.num_params(), 0.0);
  Tensor dy;
  est.loss = loss_gradient_or_throw(loss_spec, checkpoints.back(), batch, dy, fc);

  for (std::size_t k = segments; k-- > 0;) {
    const Tensor& seg_input = k == 0 ? batch.x : checkpoints[k - 1];
    const std::size_t first = plan.boundaries[k];
    const std::size_t last = segment_end(k);
    std::vector<Tensor> workspace;
    workspace.reserve(last - first);
    std::size_t held = 0;
    for (std::size_t i = first; i < last; ++i) {
      const Tensor& in = i == first ? seg_input : workspace.back();
      workspace.push_back(layer_forward(model.layer(i), layer_slice(model, w, i), in, fc));
      meter.hold(workspace.back().size());
      held += workspace.back().size();
    }
    for (std::size_t i = last; i-- > first;) {
      const Tensor& in = i == first ? seg_input : workspace[i - first - 1];
      dy = layer_backward(model.layer(i), layer_slice(model, w, i), in,
                          workspace[i - first], dy,
                          layer_slice(model, std::span(est.g), i), fc);
    }
    meter.release(held);
  }
  est.peak_activation_units = meter.peak();
  est.flops = fc.total() - start;
  return est;
}

GradEstimate backward_checkpointed(const Model& model, const Batch& batch,
                                   const LossSpec& loss_spec,
                                   const CheckpointPlan& plan, FlopCounter& fc) {
  return backward_checkpointed(model, model.params.data, batch, loss_spec, plan, fc);
}

}  // namespace gradbench
