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

#include "gradbench/model_objective.h"

#include <algorithm>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/forward_ad.h"
#include "gradbench/zero_order.h"

namespace gradbench {
namespace {

Tensor row_slice(const Tensor& t, std::size_t begin, std::size_t end) {
  const std::size_t cols = t.cols();
  std::vector<std::size_t> shape = t.shape();
  shape[0] = end - begin;
  const auto data = t.data().subspan(begin * cols, (end - begin) * cols);
  return Tensor(std::move(shape), std::vector<double>(data.begin(), data.end()));
}

}  // namespace

ModelObjective::ModelObjective(Model model, Batch batch, LossSpec loss,
                               std::optional<CheckpointPlan> plan)
    : model_(std::move(model)), batch_(std::move(batch)), loss_(loss) {
  plan_ = plan ? std::move(*plan) : CheckpointPlan::for_depth(model_.depth());
  plan_.validate(model_.depth());
}

LossEval ModelObjective::loss(std::span<const double> w, const Direction* dir,
                              double scale, FlopCounter& fc) const {
  return perturbed_loss(model_, w, batch_, loss_, dir, scale, fc);
}

JvpResult ModelObjective::jvp(std::span<const double> w, const Direction& dir,
                              FlopCounter& fc) const {
  return gradbench::jvp(model_, w, batch_, loss_, dir, fc);
}

GradientEval ModelObjective::gradient(std::span<const double> w, std::span<double> out,
                                      FlopCounter& fc) const {
  GradEstimate est = backward_vanilla(model_, w, batch_, loss_, fc);
  std::copy(est.g.begin(), est.g.end(), out.begin());
  return {est.loss, est.peak_activation_units};
}

GradientEval ModelObjective::gradient_checkpointed(std::span<const double> w,
                                                   std::span<double> out,
                                                   FlopCounter& fc) const {
  GradEstimate est = backward_checkpointed(model_, w, batch_, loss_, plan_, fc);
  std::copy(est.g.begin(), est.g.end(), out.begin());
  return {est.loss, est.peak_activation_units};
}

ModelProblem::ModelProblem(Model model, Batch data, LossSpec loss,
                           std::size_t batch_size,
                           std::optional<std::size_t> segment_size) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  validate_target(loss, Tensor({data.x.rows(), model.output_dim()}), data.target);
  auto plan = CheckpointPlan::for_depth(model.depth(), segment_size.value_or(0));
  const std::size_t rows = data.x.rows();
  for (std::size_t begin = 0; begin < rows; begin += batch_size) {
    const std::size_t end = std::min(rows, begin + batch_size);
    Batch b{row_slice(data.x, begin, end), row_slice(data.target, begin, end)};
    batches_.push_back(std::make_unique<ModelObjective>(model, std::move(b), loss, plan));
  }
  full_ = std::make_unique<ModelObjective>(std::move(model), std::move(data), loss,
                                           std::move(plan));
}

std::vector<double> ModelProblem::initial_point(std::uint64_t seed) const {
  return init_params(full_->model(), seed).data;
}

std::optional<double> ModelProblem::accuracy(std::span<const double> w) const {
  if (full_->loss_spec().kind != LossKind::kCrossEntropy) return std::nullopt;
  FlopCounter scratch;
  const ForwardResult fr = forward(full_->model(), w, full_->batch().x, scratch);
  const Tensor& y = fr.output();
  const Tensor& target = full_->batch().target;
  const bool indices = target.shape() != y.shape();
  std::size_t correct = 0;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    const auto row = y.data().subspan(r * y.cols(), y.cols());
    const auto pred = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    std::size_t label = 0;
    if (indices) {
      label = static_cast<std::size_t>(target[r]);
    } else {
      const auto trow = target.data().subspan(r * y.cols(), y.cols());
      label = static_cast<std::size_t>(
          std::max_element(trow.begin(), trow.end()) - trow.begin());
    }
    if (pred == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y.rows());
}

}  // namespace gradbench
