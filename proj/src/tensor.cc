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

#include "gradbench/tensor.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <utility>

#include "gradbench/errors.h"

namespace gradbench {
namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (std::size_t dim : shape) {
    if (dim == 0) {
      throw ShapeError("tensor dimensions must be positive, got " +
                       shape_string(shape));
    }
  }
}

}  // namespace

void ActivationMeter::hold(std::size_t units) {
  current_ += units;
  peak_ = std::max(peak_, current_);
}

void ActivationMeter::release(std::size_t units) {
  current_ = units > current_ ? 0 : current_ - units;
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_product(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::rows() const { return shape_.empty() ? 0 : shape_[0]; }

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 0;
  return data_.size() / shape_[0];
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          FlopCounter& fc) {
  if (a.size() != m * k || b.size() != k * n || c.size() != m * n) {
    throw ShapeError("gemm buffer sizes do not match " + std::to_string(m) +
                     "x" + std::to_string(k) + "x" + std::to_string(n));
  }
  std::fill(c.begin(), c.end(), 0.0);
  // i-k-j order; each c[i][j] still accumulates over k in ascending order,
  // starting from zero, exactly as the textbook triple loop does.
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  fc.add(2 * static_cast<std::uint64_t>(m) * k * n);
}

Tensor matmul(const Tensor& a, const Tensor& b, FlopCounter& fc) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw ShapeError("matmul shape mismatch: " + shape_string(a.shape()) +
                     " * " + shape_string(b.shape()));
  }
  const std::size_t m = a.shape()[0];
  const std::size_t k = a.shape()[1];
  const std::size_t n = b.shape()[1];
  Tensor c({m, n});
  gemm(a.data(), b.data(), c.data(), m, k, n, fc);
  return c;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw ShapeError("transpose needs a matrix, got " + shape_string(a.shape()));
  }
  const std::size_t m = a.shape()[0];
  const std::size_t n = a.shape()[1];
  Tensor t({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
  }
  return t;
}

namespace {

double apply(ElementOp op, double x, double y) {
  switch (op) {
    case ElementOp::kAdd:
      return x + y;
    case ElementOp::kSub:
      return x - y;
    case ElementOp::kMul:
      return x * y;
  }
  return 0.0;
}

}  // namespace

Tensor elementwise(ElementOp op, const Tensor& a, const Tensor& b,
                   FlopCounter& fc) {
  if (a.shape() != b.shape()) {
    throw ShapeError("elementwise shape mismatch: " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(op, a[i], b[i]);
  fc.add(out.size());
  return out;
}

Tensor elementwise(ElementOp op, const Tensor& a, double b, FlopCounter& fc) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(op, a[i], b);
  fc.add(out.size());
  return out;
}

double reduce(const Tensor& a, ReduceKind kind, FlopCounter& fc) {
  if (a.empty()) throw ShapeError("reduce of an empty tensor");
  const auto values = a.data();
  double acc = values[0];
  switch (kind) {
    case ReduceKind::kSum:
    case ReduceKind::kMean:
      for (std::size_t i = 1; i < values.size(); ++i) acc += values[i];
      fc.add(values.size() - 1);
      if (kind == ReduceKind::kMean) {
        acc /= static_cast<double>(values.size());
        fc.add(1);
      }
      return acc;
    case ReduceKind::kMax:
      for (std::size_t i = 1; i < values.size(); ++i) acc = std::max(acc, values[i]);
      fc.add(values.size() - 1);
      return acc;
  }
  return acc;
}

}  // namespace gradbench
