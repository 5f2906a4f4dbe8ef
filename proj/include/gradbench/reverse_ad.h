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

// Reverse-mode differentiation over a Model: vanilla backpropagation, which
// retains every activation, and segment checkpointing, which retains one
// activation per segment and recomputes segment interiors on the way back.
//
// Memory is reported in activation units (retained f64 activation scalars,
// the input x excluded). Vanilla retains sum_i |y_i|. Checkpointing with
// segment size s retains ceil(D/s) segment outputs plus one recomputed
// segment of s activations.

#ifndef GRADBENCH_REVERSE_AD_H_
#define GRADBENCH_REVERSE_AD_H_

#include <cstddef>
#include <span>
#include <vector>

#include "gradbench/nn.h"
#include "gradbench/objective.h"
#include "gradbench/tensor.h"

namespace gradbench {

struct CheckpointPlan {
  std::size_t segment_size = 1;
  // First layer index of each segment: 0, s, 2s, ... (< depth).
  std::vector<std::size_t> boundaries;

  // segment_size 0 selects ceil(sqrt(depth)).
  static CheckpointPlan for_depth(std::size_t depth, std::size_t segment_size = 0);
  void validate(std::size_t depth) const;
  std::size_t num_segments() const { return boundaries.size(); }
};

// Backward through one layer. Writes the layer's parameter gradient into
// `grad` (its slice of the flat gradient) and returns dL/d(input).
Tensor layer_backward(const LayerSpec& spec, std::span<const double> layer_params,
                      const Tensor& input, const Tensor& output, const Tensor& dy,
                      std::span<double> grad, FlopCounter& fc);

GradEstimate backward_vanilla(const Model& model, std::span<const double> w,
                              const Batch& batch, const LossSpec& loss_spec,
                              FlopCounter& fc);
GradEstimate backward_vanilla(const Model& model, const Batch& batch,
                              const LossSpec& loss_spec, FlopCounter& fc);

GradEstimate backward_checkpointed(const Model& model, std::span<const double> w,
                                   const Batch& batch, const LossSpec& loss_spec,
                                   const CheckpointPlan& plan, FlopCounter& fc);
GradEstimate backward_checkpointed(const Model& model, const Batch& batch,
                                   const LossSpec& loss_spec,
                                   const CheckpointPlan& plan, FlopCounter& fc);

}  // namespace gradbench

#endif  // GRADBENCH_REVERSE_AD_H_
