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

#include "gradbench/forward_ad.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gradbench/errors.h"

namespace gradbench {

JvpResult jvp(const Model& model, std::span<const double> w, const Batch& batch,
              const LossSpec& loss_spec, const Direction& v, FlopCounter& fc) {
  if (w.size() != model.num_params() || v.dim() != model.num_params()) {
    throw ShapeError("jvp needs parameter and direction length " +
                     std::to_string(model.num_params()) + ", got " +
                     std::to_string(w.size()) + " and " + std::to_string(v.dim()));
  }
  if (batch.x.rank() != 2 || batch.x.cols() != model.input_dim()) {
    throw ShapeError("batch input " + shape_string(batch.x.shape()) +
                     " does not match model input width");
  }
  const std::uint64_t start = fc.total();
  JvpResult result;
  Tensor primal = batch.x;
  std::optional<Tensor> tangent;  // empty while it is identically zero
  std::vector<double> dw;
  for (std::size_t i = 0; i < model.depth(); ++i) {
    const LayerSpec& spec = model.layer(i);
    const ParamSlice slice = model.layout()[i];
    const auto wl = w.subspan(slice.start, slice.length);
    Tensor y = layer_forward(spec, wl, primal, fc);
    Tensor t(y.shape());
    if (spec.kind == LayerKind::kLinear) {
      const std::size_t rows = primal.rows();
      const std::size_t nw = spec.in_dim * spec.out_dim;
      dw.resize(slice.length);
      v.fill(slice.start, dw);
      gemm(primal.data(), std::span<const double>(dw).first(nw), t.data(), rows,
           spec.in_dim, spec.out_dim, fc);
      if (tangent) {
        Tensor carried(y.shape());
        gemm(tangent->data(), wl.first(nw), carried.data(), rows, spec.in_dim,
             spec.out_dim, fc);
        for (std::size_t k = 0; k < t.size(); ++k) t[k] += carried[k];
        fc.add(t.size());
      }
      if (spec.bias) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < spec.out_dim; ++j) t.at(r, j) += dw[nw + j];
        }
        fc.add(t.size());
      }
    } else if (tangent) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = (*tangent)[k] *
               activation_derivative(spec.activation, primal[k], y[k]);
      }
      fc.add(2 * t.size());
    }
    result.peak_activation_units =
        std::max(result.peak_activation_units, y.size() + t.size());
    primal = std::move(y);
    tangent = std::move(t);
  }
  double value = 0.0;
  result.jvp = loss_tangent(loss_spec, primal, *tangent, batch.target, value, fc);
  result.loss = value;
  if (!std::isfinite(result.jvp) || !std::isfinite(value)) {
    throw OverflowError("non-finite jvp in forward-mode pass");
  }
  result.flops = fc.total() - start;
  return result;
}

GradEstimate fmad_estimate(const Objective& objective, std::span<const double> w,
                           const Direction& v, FlopCounter& fc) {
  const std::uint64_t start = fc.total();
  const JvpResult r = objective.jvp(w, v, fc);
  GradEstimate est;
  est.method = "fmad";
  est.g = v.materialize();
  for (double& gi : est.g) gi *= r.jvp;
  fc.add(est.g.size());
  est.jvps = {r.jvp};
  est.loss = r.loss;
  est.peak_activation_units = r.peak_activation_units;
  est.flops = fc.total() - start;
  return est;
}

GradEstimate forward_gradient(const Model& model, std::span<const double> w,
                              const Batch& batch, const LossSpec& loss_spec,
                              const Perturbation& p, FlopCounter& fc) {
  const SeededDirection v(p);
  const std::uint64_t start = fc.total();
  const JvpResult r = jvp(model, w, batch, loss_spec, v, fc);
  GradEstimate est;
  est.method = "fmad";
  est.g = v.materialize();
  for (double& gi : est.g) gi *= r.jvp;
  fc.add(est.g.size());
  est.jvps = {r.jvp};
  est.loss = r.loss;
  est.peak_activation_units = r.peak_activation_units;
  est.flops = fc.total() - start;
  return est;
}

}  // namespace gradbench
