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

#include "gradbench/synthetic.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/random.h"

namespace gradbench {

SeparableQuadratic::SeparableQuadratic(std::vector<double> lambdas,
                                       std::vector<double> linear)
    : lambdas_(std::move(lambdas)), linear_(std::move(linear)) {
  if (lambdas_.empty()) throw ShapeError("objective dimension must be positive");
  if (linear_.empty()) linear_.assign(lambdas_.size(), 0.0);
  if (linear_.size() != lambdas_.size()) {
    throw ShapeError("linear term length " + std::to_string(linear_.size()) +
                     " does not match dimension " + std::to_string(lambdas_.size()));
  }
}

LossEval SeparableQuadratic::loss(std::span<const double> w, const Direction* dir,
                                  double scale, FlopCounter& fc) const {
  if (w.size() != dim()) throw ShapeError("parameter length mismatch");
  std::vector<double> u(w.begin(), w.end());
  if (dir != nullptr) {
    std::vector<double> v(dim());
    dir->fill(0, v);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = w[i] + scale * v[i];
    fc.add(2 * u.size());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += 0.5 * lambdas_[i] * u[i] * u[i] + linear_[i] * u[i];
  }
  fc.add(6 * u.size());
  return {acc, 1};
}

JvpResult SeparableQuadratic::jvp(std::span<const double> w, const Direction& dir,
                                  FlopCounter& fc) const {
  if (w.size() != dim() || dir.dim() != dim()) {
    throw ShapeError("jvp length mismatch");
  }
  const std::uint64_t start = fc.total();
  JvpResult r;
  r.loss = loss(w, nullptr, 0.0, fc).loss;
  std::vector<double> v(dim());
  dir.fill(0, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += (lambdas_[i] * w[i] + linear_[i]) * v[i];
  }
  fc.add(4 * v.size());
  if (!std::isfinite(acc)) throw OverflowError("non-finite jvp");
  r.jvp = acc;
  r.peak_activation_units = 2;
  r.flops = fc.total() - start;
  return r;
}

GradientEval SeparableQuadratic::gradient(std::span<const double> w,
                                          std::span<double> out,
                                          FlopCounter& fc) const {
  if (w.size() != dim() || out.size() != dim()) {
    throw ShapeError("gradient length mismatch");
  }
  const double value = loss(w, nullptr, 0.0, fc).loss;
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = lambdas_[i] * w[i] + linear_[i];
  fc.add(2 * w.size());
  return {value, 1};
}

double SeparableQuadratic::smoothness() const {
  return *std::max_element(lambdas_.begin(), lambdas_.end());
}

std::unique_ptr<SeparableQuadratic> make_quadratic(std::size_t d, double L) {
  if (!(L > 0.0)) throw ConfigError("smoothness L must be positive");
  return std::make_unique<SeparableQuadratic>(std::vector<double>(d, L),
                                              std::vector<double>{});
}

std::unique_ptr<SeparableQuadratic> make_linear(std::vector<double> g) {
  const std::size_t d = g.size();
  return std::make_unique<SeparableQuadratic>(std::vector<double>(d, 0.0),
                                              std::move(g));
}

std::unique_ptr<SeparableQuadratic> make_ill_conditioned(std::size_t d, double L,
                                                         double condition) {
  if (!(L > 0.0) || !(condition >= 1.0)) {
    throw ConfigError("ill-conditioned quadratic needs L > 0 and condition >= 1");
  }
  std::vector<double> lambdas(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double frac = d == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    lambdas[i] = L * std::pow(condition, frac - 1.0);
  }
  return std::make_unique<SeparableQuadratic>(std::move(lambdas),
                                              std::vector<double>{});
}

SyntheticProblem::SyntheticProblem(std::unique_ptr<Objective> objective,
                                   double init_scale)
    : objective_(std::move(objective)), init_scale_(init_scale) {}

std::vector<double> SyntheticProblem::initial_point(std::uint64_t seed) const {
  std::vector<double> w(objective_->dim());
  fill_normal(derive_seed(seed, 0x1417), 0, w, init_scale_);
  return w;
}

Batch make_blobs(std::size_t samples, std::size_t dim, std::size_t classes,
                 double separation, std::uint64_t seed) {
  if (samples == 0 || dim == 0 || classes < 2) {
    throw ConfigError("blobs need samples > 0, dim > 0 and at least 2 classes");
  }
  std::vector<double> centres(classes * dim);
  fill_normal(derive_seed(seed, 0xB10B, 1), 0, centres,
              separation / std::sqrt(static_cast<double>(dim)));
  Tensor x({samples, dim});
  Tensor labels({samples});
  fill_normal(derive_seed(seed, 0xB10B, 2), 0, x.data());
  for (std::size_t r = 0; r < samples; ++r) {
    const std::size_t k = r % classes;
    labels[r] = static_cast<double>(k);
    for (std::size_t j = 0; j < dim; ++j) x.at(r, j) += centres[k * dim + j];
  }
  return {std::move(x), std::move(labels)};
}

Batch make_regression(const Model& model, std::size_t samples, double noise_std,
                      std::uint64_t seed) {
  Tensor x({samples, model.input_dim()});
  fill_normal(derive_seed(seed, 0x7EAC, 1), 0, x.data());
  const ParamVector teacher = init_params(model, derive_seed(seed, 0x7EAC, 2));
  FlopCounter scratch;
  Tensor y = forward(model, teacher.data, x, scratch).output();
  if (noise_std > 0.0) {
    std::vector<double> noise(y.size());
    fill_normal(derive_seed(seed, 0x7EAC, 3), 0, noise, noise_std);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += noise[i];
  }
  return {std::move(x), std::move(y)};
}

double softmax_linear_smoothness(const Tensor& x) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols() + 1;
  std::vector<double> gram(p * p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = i + 1 < p ? x.at(r, i) : 1.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double xj = j + 1 < p ? x.at(r, j) : 1.0;
        gram[i * p + j] += xi * xj;
      }
    }
  }
  for (double& g : gram) g /= static_cast<double>(n);
  // Power iteration on the PSD Gram matrix.
  std::vector<double> v(p, 1.0);
  std::vector<double> next(p);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    for (std::size_t i = 0; i < p; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p; ++j) acc += gram[i * p + j] * v[j];
      next[i] = acc;
    }
    const double norm = std::sqrt(norm_sq(next));
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < p; ++i) v[i] = next[i] / norm;
    if (std::abs(norm - lambda) <= 1e-12 * norm) {
      lambda = norm;
      break;
    }
    lambda = norm;
  }
  return 0.5 * lambda;
}

}  // namespace gradbench
