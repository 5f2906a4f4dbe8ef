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

// Closed-form synthetic objectives and small datasets for experiments.
//
// SeparableQuadratic is f(w) = 1/2 sum_i lambda_i w_i^2 + g . w, which covers
// the isotropic quadratic (lambda_i = L, g = 0), the ill-conditioned diagonal
// quadratic, and the linear objective (lambda = 0). Its smoothness constant
// is max_i lambda_i. Memory is reported as 1 unit per loss or gradient
// evaluation and 2 units per jvp (a scalar primal and tangent).

#ifndef GRADBENCH_SYNTHETIC_H_
#define GRADBENCH_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gradbench/nn.h"
#include "gradbench/objective.h"

namespace gradbench {

class SeparableQuadratic : public Objective {
 public:
  SeparableQuadratic(std::vector<double> lambdas, std::vector<double> linear);

  std::size_t dim() const override { return lambdas_.size(); }
  LossEval loss(std::span<const double> w, const Direction* dir, double scale,
                FlopCounter& fc) const override;
  JvpResult jvp(std::span<const double> w, const Direction& dir,
                FlopCounter& fc) const override;
  GradientEval gradient(std::span<const double> w, std::span<double> out,
                        FlopCounter& fc) const override;

  double smoothness() const;
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<double>& linear() const { return linear_; }

 private:
  std::vector<double> lambdas_;
  std::vector<double> linear_;
};

// L/2 |w|^2.
std::unique_ptr<SeparableQuadratic> make_quadratic(std::size_t d, double L);
// g . w.
std::unique_ptr<SeparableQuadratic> make_linear(std::vector<double> g);
// Eigenvalues log-spaced from L / condition up to L.
std::unique_ptr<SeparableQuadratic> make_ill_conditioned(std::size_t d, double L,
                                                         double condition);

// A single deterministic objective; w_1 ~ init_scale * N(0, I).
class SyntheticProblem : public Problem {
 public:
  SyntheticProblem(std::unique_ptr<Objective> objective, double init_scale = 1.0);

  const Objective& full() const override { return *objective_; }
  std::vector<double> initial_point(std::uint64_t seed) const override;

 private:
  std::unique_ptr<Objective> objective_;
  double init_scale_;
};

// Gaussian blobs: `classes` centres drawn as N(0, separation^2 / dim * I),
// samples = centre + N(0, I), labels as a [samples] class-index tensor.
Batch make_blobs(std::size_t samples, std::size_t dim, std::size_t classes,
                 double separation, std::uint64_t seed);

// Inputs N(0, I), targets from a random teacher with the same architecture
// plus noise_std * N(0, I).
Batch make_regression(const Model& model, std::size_t samples, double noise_std,
                      std::uint64_t seed);

// Upper bound on the smoothness of mean softmax cross-entropy for a linear
// model with bias: 0.5 * lambda_max(X~^T X~ / N), X~ = [X, 1].
double softmax_linear_smoothness(const Tensor& x);

}  // namespace gradbench

#endif  // GRADBENCH_SYNTHETIC_H_
