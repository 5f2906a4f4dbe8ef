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

// Objectives f: R^d -> R seen through the three operations the gradient
// engines need (perturbed loss, jvp, exact gradient), and the directions v
// they are probed along.
//
// Directions are regenerable: a SeededDirection stores only a Perturbation
// and produces any slice of v on demand, so no engine ever has to hold a
// d-length copy of v next to w.

#ifndef GRADBENCH_OBJECTIVE_H_
#define GRADBENCH_OBJECTIVE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradbench/tensor.h"

namespace gradbench {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// v ~ N(0, sigma2 * I_dim), identified by its seed.
struct Perturbation {
  std::uint64_t seed = 0;
  double sigma2 = 1.0;
  std::size_t dim = 0;
};

// Entry i of v is sqrt(sigma2) * normal_at(seed, i): a SplitMix64 counter
// stream fed through Box-Muller, cosine branch for even i and sine for odd.
std::vector<double> regenerate(const Perturbation& p);

class Direction {
 public:
  virtual ~Direction() = default;
  virtual std::size_t dim() const = 0;
  // Writes v[offset .. offset + out.size()).
  virtual void fill(std::size_t offset, std::span<double> out) const = 0;

  std::vector<double> materialize() const;
};

class DenseDirection : public Direction {
 public:
  explicit DenseDirection(std::vector<double> values);

  std::size_t dim() const override { return values_.size(); }
  void fill(std::size_t offset, std::span<double> out) const override;
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

class SeededDirection : public Direction {
 public:
  // `mask`, if given, lists the coordinates that may be non-zero (sorted).
  explicit SeededDirection(Perturbation p,
                           std::optional<std::vector<std::size_t>> mask = {});

  std::size_t dim() const override { return p_.dim; }
  void fill(std::size_t offset, std::span<double> out) const override;
  const Perturbation& perturbation() const { return p_; }

 private:
  Perturbation p_;
  std::optional<std::vector<std::size_t>> mask_;
};

struct LossEval {
  double loss = kNaN;
  std::size_t peak_activation_units = 0;
};

struct JvpResult {
  double jvp = 0.0;
  double loss = kNaN;
  std::size_t peak_activation_units = 0;
  std::uint64_t flops = 0;
};

struct GradientEval {
  double loss = kNaN;
  std::size_t peak_activation_units = 0;
};

struct GradEstimate {
  std::vector<double> g;
  std::string method;
  std::size_t n = 1;
  double epsilon = 0.0;      // zero for the exact engines
  std::vector<double> jvps;  // projected scalar per perturbation
  std::uint64_t flops = 0;
  std::size_t peak_activation_units = 0;
  double loss = kNaN;
  bool calibration_fallback = false;
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;

  // f(w + scale * dir); `dir` may be null for f(w). `w` is never modified.
  virtual LossEval loss(std::span<const double> w, const Direction* dir,
                        double scale, FlopCounter& fc) const = 0;

  virtual JvpResult jvp(std::span<const double> w, const Direction& dir,
                        FlopCounter& fc) const = 0;

  // Writes the exact gradient into `out` (length dim()).
  virtual GradientEval gradient(std::span<const double> w, std::span<double> out,
                                FlopCounter& fc) const = 0;

  // Same gradient under activation checkpointing; defaults to gradient().
  virtual GradientEval gradient_checkpointed(std::span<const double> w,
                                             std::span<double> out,
                                             FlopCounter& fc) const {
    return gradient(w, out, fc);
  }

  // Uncounted conveniences for telemetry and tests.
  double value(std::span<const double> w) const;
  std::vector<double> grad(std::span<const double> w) const;
};

// A training problem: the full objective plus the minibatches it splits into.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual const Objective& full() const = 0;
  virtual std::size_t num_batches() const { return 1; }
  virtual const Objective& batch(std::size_t /*i*/) const { return full(); }
  virtual std::vector<double> initial_point(std::uint64_t seed) const = 0;
  // Fraction of correctly classified training samples, if meaningful.
  virtual std::optional<double> accuracy(std::span<const double> /*w*/) const {
    return std::nullopt;
  }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);

}  // namespace gradbench

#endif  // GRADBENCH_OBJECTIVE_H_
