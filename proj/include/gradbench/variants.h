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

// Variance-reduction wrappers over the two perturbation estimators.
//
//   Multiple    mean of n base estimates, run sequentially or on n workers.
//               Both modes reduce in perturbation-index order and so return
//               bit-identical gradients; only the memory peak differs.
//   Accumulate  mean of K consecutive estimates, emitted every K-th call.
//   Adaptive    calibrate on k candidates, then sample along a rolling mix
//               of the last estimate and a fresh draw.
//   SVRG        g_v(w) - g_v(w~) + mu with one shared v per step.
//   Sparse      perturb and update only the top fraction of |w|.

#ifndef GRADBENCH_VARIANTS_H_
#define GRADBENCH_VARIANTS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradbench/objective.h"
#include "gradbench/tensor.h"

namespace gradbench {

enum class BaseEstimator { kFmad, kZo };
enum class ExecutionMode { kSequential, kParallel };

ExecutionMode parse_execution_mode(std::string_view name);
std::string execution_mode_name(ExecutionMode mode);

struct EstimatorConfig {
  BaseEstimator base = BaseEstimator::kFmad;
  std::size_t n = 1;
  ExecutionMode mode = ExecutionMode::kSequential;
  std::size_t accumulation_window = 100;
  std::size_t svrg_interval = 5;  // epochs
  std::size_t svrg_full_n = 1;
  double sparse_fraction = 0.01;
  std::size_t adaptive_calibration_count = 4;
  double rolling_beta = 0.5;
  double epsilon = 1e-3;
  double sigma2 = 1.0;

  void validate() const;
};

// One FmAD or ZO estimate along `v`.
GradEstimate base_estimate(const Objective& objective, std::span<const double> w,
                           const Direction& v, const EstimatorConfig& cfg,
                           FlopCounter& fc);

// Mean of one base estimate per perturbation. `mask` restricts every
// direction to the listed coordinates.
GradEstimate estimate_multiple(const Objective& objective, std::span<const double> w,
                               const EstimatorConfig& cfg,
                               std::span<const Perturbation> perturbations,
                               FlopCounter& fc,
                               const std::vector<std::size_t>* mask = nullptr);

class Accumulator {
 public:
  Accumulator(std::size_t window, std::size_t dim);

  // Returns the window mean on every K-th call.
  std::optional<std::vector<double>> push(std::span<const double> g);
  std::size_t emitted() const { return emitted_; }
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  std::vector<double> sum_;
  std::size_t count_ = 0;
  std::size_t emitted_ = 0;
};

struct AdaptiveState {
  std::vector<double> direction_estimate;  // unit norm once calibrated
  bool calibrated = false;
  bool fallback = false;  // no candidate had a positive projection
};

struct CalibrationResult {
  std::size_t selected = 0;
  GradEstimate estimate;  // the selected candidate's estimate
};

// Evaluates every candidate and keeps the one with the largest projected
// scalar as the initial direction estimate.
CalibrationResult adaptive_calibrate(AdaptiveState& state, const Objective& objective,
                                     std::span<const double> w,
                                     std::span<const Direction* const> candidates,
                                     const EstimatorConfig& cfg, FlopCounter& fc);

// Folds the last estimate into the state and returns
//   normalize(beta * state + (1 - beta) * normalize(v_new)) * sqrt(d).
DenseDirection adaptive_next(AdaptiveState& state,
                             std::span<const double> last_grad_estimate,
                             std::span<const double> v_new, double beta);

struct SvrgState {
  std::vector<double> snapshot;
  std::vector<double> mu;
  std::size_t age = 0;     // estimates since the refresh
  std::size_t period = 1;  // refresh interval in iterations
};

// mu = mean over all batches of svrg_full_n base estimates at w.
SvrgState svrg_refresh(const Problem& problem, std::span<const double> w,
                       const EstimatorConfig& cfg, std::uint64_t seed,
                       FlopCounter& fc);

// Throws StaleSnapshotError when state.age exceeds state.period.
GradEstimate svrg_estimate(const Objective& objective, std::span<const double> w,
                           SvrgState& state, const Direction& v,
                           const EstimatorConfig& cfg, FlopCounter& fc);

// Indices of the ceil(fraction * d) largest |w_i|, ties to the lower index,
// returned in ascending order.
std::vector<std::size_t> sparse_mask(std::span<const double> w, double fraction);

}  // namespace gradbench

#endif  // GRADBENCH_VARIANTS_H_
