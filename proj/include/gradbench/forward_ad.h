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

// Forward-mode differentiation: one dual pass carries (y_i, dy_i) through
// the chain and yields the directional derivative jvp = v . grad L, from
// which the forward gradient jvp * v is formed.
//
// Only the current primal/tangent pair is live, so the pass holds
// 2 * max_i |y_i| activation units.

#ifndef GRADBENCH_FORWARD_AD_H_
#define GRADBENCH_FORWARD_AD_H_

#include <span>

#include "gradbench/nn.h"
#include "gradbench/objective.h"
#include "gradbench/tensor.h"

namespace gradbench {

JvpResult jvp(const Model& model, std::span<const double> w, const Batch& batch,
              const LossSpec& loss_spec, const Direction& v, FlopCounter& fc);

// jvp * v with v regenerated from `p`. FLOPs are the jvp plus d multiplies.
GradEstimate forward_gradient(const Model& model, std::span<const double> w,
                              const Batch& batch, const LossSpec& loss_spec,
                              const Perturbation& p, FlopCounter& fc);

// Same estimator for any objective.
GradEstimate fmad_estimate(const Objective& objective, std::span<const double> w,
                           const Direction& v, FlopCounter& fc);

}  // namespace gradbench

#endif  // GRADBENCH_FORWARD_AD_H_
