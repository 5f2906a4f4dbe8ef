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

#include "gradbench/zero_order.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gradbench/errors.h"

namespace gradbench {
namespace {

// Adapts a bare model + batch to the Objective interface for the estimator.
class ModelLossView : public Objective {
 public:
  ModelLossView(const Model& model, const Batch& batch, const LossSpec& loss)
      : model_(model), batch_(batch), loss_(loss) {}

  std::size_t dim() const override { return model_.num_params(); }
  LossEval loss(std::span<const double> w, const Direction* dir, double scale,
                FlopCounter& fc) const override {
    return perturbed_loss(model_, w, batch_, loss_, dir, scale, fc);
  }
  JvpResult jvp(std::span<const double>, const Direction&,
                FlopCounter&) const override {
    throw std::logic_error("jvp is not available on this view");
  }
  GradientEval gradient(std::span<const double>, std::span<double>,
                        FlopCounter&) const override {
    throw std::logic_error("gradient is not available on this view");
  }

 private:
  const Model& model_;
  const Batch& batch_;
  const LossSpec& loss_;
};

}  // namespace

void ZoConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be a positive finite number");
  }
}

LossEval perturbed_loss(const Model& model, std::span<const double> w,
                        const Batch& batch, const LossSpec& loss_spec,
                        const Direction* dir, double scale, FlopCounter& fc) {
  if (w.size() != model.num_params()) {
    throw ShapeError("parameter vector has length " + std::to_string(w.size()) +
                     ", model needs " + std::to_string(model.num_params()));
  }
  if (dir != nullptr && dir->dim() != w.size()) {
    throw ShapeError("direction length does not match the parameters");
  }
  if (batch.x.rank() != 2 || batch.x.cols() != model.input_dim()) {
    throw ShapeError("batch input " + shape_string(batch.x.shape()) +
                     " does not match model input width");
  }
  LossEval out;
  std::vector<double> scratch;
  Tensor current = batch.x;
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const LayerSpec& spec = model.layer(i);
    const ParamSlice slice = model.layout()[i];
    std::span<const double> wl = w.subspan(slice.start, slice.length);
    if (dir != nullptr && slice.length > 0) {
      scratch.resize(slice.length);
      dir->fill(slice.start, scratch);
      for (std::size_t k = 0; k < slice.length; ++k) {
        scratch[k] = wl[k] + scale * scratch[k];
      }
      fc.add(2 * slice.length);
      wl = scratch;
    }
    current = layer_forward(spec, wl, current, fc);
    out.peak_activation_units = std::max(out.peak_activation_units, current.size());
  }
  out.loss = loss(loss_spec, current, batch.target, fc);
  return out;
}

GradEstimate zo_estimate(const Objective& objective, std::span<const double> w,
                         const Direction& v, const ZoConfig& cfg, FlopCounter& fc) {
  cfg.validate();
  const std::uint64_t start = fc.total();
  const LossEval plus = objective.loss(w, &v, cfg.epsilon, fc);
  if (!std::isfinite(plus.loss)) {
    throw OverflowError("non-finite loss at w + eps*v");
  }
  const LossEval minus = objective.loss(w, &v, -cfg.epsilon, fc);
  if (!std::isfinite(minus.loss)) {
    throw OverflowError("non-finite loss at w - eps*v");
  }
  const double s = (plus.loss - minus.loss) / (2.0 * cfg.epsilon);
  fc.add(3);
  GradEstimate est;
  est.method = "zo";
  est.epsilon = cfg.epsilon;
  est.g = v.materialize();
  for (double& gi : est.g) gi *= s;
  fc.add(est.g.size());
  est.jvps = {s};
  est.loss = 0.5 * (plus.loss + minus.loss);
  est.peak_activation_units =
      std::max(plus.peak_activation_units, minus.peak_activation_units);
  est.flops = fc.total() - start;
  return est;
}

GradEstimate zo_estimate(const Model& model, std::span<const double> w,
                         const Batch& batch, const LossSpec& loss_spec,
                         const Perturbation& p, const ZoConfig& cfg,
                         FlopCounter& fc) {
  const ModelLossView view(model, batch, loss_spec);
  return zo_estimate(view, w, SeededDirection(p), cfg, fc);
}

}  // namespace gradbench
