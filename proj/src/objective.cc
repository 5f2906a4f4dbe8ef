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

#include "gradbench/objective.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/random.h"

namespace gradbench {

std::vector<double> regenerate(const Perturbation& p) {
  std::vector<double> v(p.dim);
  fill_normal(p.seed, 0, v, std::sqrt(p.sigma2));
  return v;
}

std::vector<double> Direction::materialize() const {
  std::vector<double> v(dim());
  fill(0, v);
  return v;
}

DenseDirection::DenseDirection(std::vector<double> values)
    : values_(std::move(values)) {}

void DenseDirection::fill(std::size_t offset, std::span<double> out) const {
  if (offset + out.size() > values_.size()) {
    throw ShapeError("direction slice out of range");
  }
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(offset), out.size(),
              out.begin());
}

SeededDirection::SeededDirection(Perturbation p,
                                 std::optional<std::vector<std::size_t>> mask)
    : p_(p), mask_(std::move(mask)) {
  if (p_.dim == 0) throw ShapeError("perturbation dimension must be positive");
  if (!(p_.sigma2 > 0.0)) throw ShapeError("perturbation variance must be positive");
  if (mask_) {
    if (!std::is_sorted(mask_->begin(), mask_->end())) {
      throw ShapeError("direction mask must be sorted");
    }
    if (!mask_->empty() && mask_->back() >= p_.dim) {
      throw ShapeError("direction mask index out of range");
    }
  }
}

void SeededDirection::fill(std::size_t offset, std::span<double> out) const {
  if (offset + out.size() > p_.dim) throw ShapeError("direction slice out of range");
  fill_normal(p_.seed, offset, out, std::sqrt(p_.sigma2));
  if (!mask_) return;
  auto it = std::lower_bound(mask_->begin(), mask_->end(), offset);
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (it != mask_->end() && *it == offset + j) {
      ++it;
    } else {
      out[j] = 0.0;
    }
  }
}

double Objective::value(std::span<const double> w) const {
  FlopCounter scratch;
  return loss(w, nullptr, 0.0, scratch).loss;
}

std::vector<double> Objective::grad(std::span<const double> w) const {
  FlopCounter scratch;
  std::vector<double> g(dim());
  gradient(w, g, scratch);
  return g;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot of unequal lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }

}  // namespace gradbench
