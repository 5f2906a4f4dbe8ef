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

// Dense row-major f64 tensor plus the two abstract cost meters shared by every
// gradient engine: a FLOP counter and an activation-memory meter.
//
// FLOP convention: one multiply = 1, one add = 1, so an (m x k)(k x n) matmul
// costs exactly 2*m*k*n. Activation-function application costs 1 per element.
// All reductions run left to right so results are bit-reproducible.

#ifndef GRADBENCH_TENSOR_H_
#define GRADBENCH_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gradbench {

class FlopCounter {
 public:
  void add(std::uint64_t flops) { total_ += flops; }
  std::uint64_t total() const { return total_; }
  void merge(const FlopCounter& other) { total_ += other.total_; }

 private:
  std::uint64_t total_ = 0;
};

// Counts retained 64-bit activation scalars ("activation units").
class ActivationMeter {
 public:
  void hold(std::size_t units);
  void release(std::size_t units);
  std::size_t current() const { return current_; }
  std::size_t peak() const { return peak_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  // Convenience for tests and small literals: a rows x cols matrix.
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> values);
  static Tensor vector(std::initializer_list<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t rank() const { return shape_.size(); }

  // Leading dimension and the product of the remaining ones.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

// (m x k) * (k x n). Adds 2*m*k*n to `fc`.
Tensor matmul(const Tensor& a, const Tensor& b, FlopCounter& fc);

// Span-level kernel behind matmul: c (m x n) = a (m x k) * b (k x n).
// `c` is overwritten. Same summation order and FLOP count as matmul.
void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t m, std::size_t k, std::size_t n,
          FlopCounter& fc);

// Layout change only; no FLOPs.
Tensor transpose(const Tensor& a);

enum class ElementOp { kAdd, kSub, kMul };

// Pointwise op over equal shapes, or with a scalar right-hand side.
// Adds one FLOP per element.
Tensor elementwise(ElementOp op, const Tensor& a, const Tensor& b,
                   FlopCounter& fc);
Tensor elementwise(ElementOp op, const Tensor& a, double b, FlopCounter& fc);

inline Tensor add(const Tensor& a, const Tensor& b, FlopCounter& fc) {
  return elementwise(ElementOp::kAdd, a, b, fc);
}
inline Tensor sub(const Tensor& a, const Tensor& b, FlopCounter& fc) {
  return elementwise(ElementOp::kSub, a, b, fc);
}
inline Tensor mul(const Tensor& a, const Tensor& b, FlopCounter& fc) {
  return elementwise(ElementOp::kMul, a, b, fc);
}
inline Tensor scale(const Tensor& a, double s, FlopCounter& fc) {
  return elementwise(ElementOp::kMul, a, s, fc);
}

enum class ReduceKind { kSum, kMean, kMax };

// Left-to-right reduction. Throws ShapeError on an empty tensor.
double reduce(const Tensor& a, ReduceKind kind, FlopCounter& fc);

}  // namespace gradbench

#endif  // GRADBENCH_TENSOR_H_
