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

// Parameter update rules (SGD, Nesterov momentum, AdamW) and the step-size
// admissibility thresholds for exact and perturbation-based gradients.

#ifndef GRADBENCH_OPTIM_H_
#define GRADBENCH_OPTIM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gradbench {

enum class OptimizerKind { kSgd, kNesterov, kAdamw };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string optimizer_name(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double eta = 0.01;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  double eps = 1e-8;

  void validate() const;
};

struct StepStats {
  double update_norm = 0.0;              // |w_new - w_old|
  double effective_gradient_norm = 0.0;  // |w_new - w_old| / eta
};

class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, std::size_t dim);

  // Updates `w` in place. With a mask, only the listed coordinates (and
  // their optimizer state) change. Throws OverflowError on a non-finite
  // gradient, leaving `w` untouched.
  StepStats step(std::span<double> w, std::span<const double> g,
                 std::span<const std::size_t> mask = {});

  const OptimizerConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }

 private:
  double update(std::size_t i, double w, double g);

  OptimizerConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
  double bias1_ = 1.0;
  double bias2_ = 1.0;
};

// 2 / (L (1 + (d + 1) / n)).
double max_stable_eta(double L, std::size_t d, std::size_t n);
// 1 / L.
double bp_max_eta(double L);

}  // namespace gradbench

#endif  // GRADBENCH_OPTIM_H_
