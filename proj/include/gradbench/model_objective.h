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

// Adapters from (model, data, loss) to the Objective and Problem interfaces.

#ifndef GRADBENCH_MODEL_OBJECTIVE_H_
#define GRADBENCH_MODEL_OBJECTIVE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gradbench/nn.h"
#include "gradbench/objective.h"
#include "gradbench/reverse_ad.h"

namespace gradbench {

class ModelObjective : public Objective {
 public:
  ModelObjective(Model model, Batch batch, LossSpec loss,
                 std::optional<CheckpointPlan> plan = std::nullopt);

  std::size_t dim() const override { return model_.num_params(); }
  LossEval loss(std::span<const double> w, const Direction* dir, double scale,
                FlopCounter& fc) const override;
  JvpResult jvp(std::span<const double> w, const Direction& dir,
                FlopCounter& fc) const override;
  GradientEval gradient(std::span<const double> w, std::span<double> out,
                        FlopCounter& fc) const override;
  GradientEval gradient_checkpointed(std::span<const double> w, std::span<double> out,
                                     FlopCounter& fc) const override;

  const Model& model() const { return model_; }
  const Batch& batch() const { return batch_; }
  const LossSpec& loss_spec() const { return loss_; }
  const CheckpointPlan& plan() const { return plan_; }

 private:
  Model model_;
  Batch batch_;
  LossSpec loss_;
  CheckpointPlan plan_;
};

// A dataset split into contiguous minibatches of `batch_size` rows (the last
// one may be shorter). Parameters start from init_params(model, seed).
class ModelProblem : public Problem {
 public:
  ModelProblem(Model model, Batch data, LossSpec loss, std::size_t batch_size,
               std::optional<std::size_t> segment_size = std::nullopt);

  const Objective& full() const override { return *full_; }
  std::size_t num_batches() const override { return batches_.size(); }
  const Objective& batch(std::size_t i) const override { return *batches_[i]; }
  std::vector<double> initial_point(std::uint64_t seed) const override;
  std::optional<double> accuracy(std::span<const double> w) const override;

  const Model& model() const { return full_->model(); }

 private:
  std::unique_ptr<ModelObjective> full_;
  std::vector<std::unique_ptr<ModelObjective>> batches_;
};

}  // namespace gradbench

#endif  // GRADBENCH_MODEL_OBJECTIVE_H_
