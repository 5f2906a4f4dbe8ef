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

// Zero-order estimation by central differences along a seeded direction:
//   s = (f(w + eps v) - f(w - eps v)) / (2 eps),   g = s v.
//
// Perturbed weights are formed one layer at a time in a scratch buffer
// (w_l + scale * v_l) so the caller's parameters are never written and stay
// bit-identical. Each evaluation costs a plain forward pass plus 2 FLOPs per
// parameter; the pair plus the final scaling is 2 forwards + 5d.

#ifndef GRADBENCH_ZERO_ORDER_H_
#define GRADBENCH_ZERO_ORDER_H_

#include <span>

#include "gradbench/nn.h"
#include "gradbench/objective.h"
#include "gradbench/tensor.h"

namespace gradbench {

struct ZoConfig {
  double epsilon = 1e-3;

  void validate() const;
};

// f(w + scale * dir) for a model; dir may be null. Holds one live
// activation at a time, so the peak is max_i |y_i|.
LossEval perturbed_loss(const Model& model, std::span<const double> w,
                        const Batch& batch, const LossSpec& loss_spec,
                        const Direction* dir, double scale, FlopCounter& fc);

GradEstimate zo_estimate(const Model& model, std::span<const double> w,
                         const Batch& batch, const LossSpec& loss_spec,
                         const Perturbation& p, const ZoConfig& cfg,
                         FlopCounter& fc);

GradEstimate zo_estimate(const Objective& objective, std::span<const double> w,
                         const Direction& v, const ZoConfig& cfg, FlopCounter& fc);

}  // namespace gradbench

#endif  // GRADBENCH_ZERO_ORDER_H_
