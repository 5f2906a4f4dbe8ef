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

// Experiment procedures and oracles: estimator bias/variance checks, the
// estimate -> step training loop with per-iteration telemetry, convergence
// bounds for the three gradient families, and jvp spike detection.

#ifndef GRADBENCH_ANALYSIS_H_
#define GRADBENCH_ANALYSIS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradbench/objective.h"
#include "gradbench/optim.h"
#include "gradbench/variants.h"

namespace gradbench {

enum class Family { kBp, kFmad, kZo };
enum class Variant {
  kVanilla,
  kCheckpointing,
  kAccumulate,
  kMultiple,
  kAdaptive,
  kSvrg,
  kSparse,
};

struct Method {
  Family family = Family::kBp;
  Variant variant = Variant::kVanilla;

  // "bp-vanilla", "zo-svrg", ...; throws ConfigError listing the roster.
  static Method parse(std::string_view name);
  std::string name() const;
  bool operator==(const Method&) const = default;
};

const std::vector<std::string>& method_names();

// ---------------------------------------------------------------------------
// Training loop

struct RunRecord {
  std::size_t iter = 0;
  double loss = kNaN;          // f(w_t), full objective
  double grad_norm_sq = kNaN;  // |grad f(w_t)|^2
  double jvp_mean = kNaN;      // mean |projected scalar| this iteration
  double jvp_max = kNaN;       // max |projected scalar| this iteration
  std::uint64_t flops_cum = 0;
  std::size_t peak_act_units = 0;  // running maximum
  double update_norm = 0.0;
};

struct RunOptions {
  // Full-objective loss and gradient norm every iteration (not counted in
  // FLOPs). When off, only the final point is evaluated and divergence is
  // judged on the minibatch loss the estimator already computes.
  bool telemetry = true;
};

struct RunResult {
  std::vector<RunRecord> records;
  bool diverged = false;
  std::string divergence_reason;
  std::vector<double> final_w;
  double final_loss = kNaN;
  std::optional<double> final_accuracy;
  std::uint64_t flops_total = 0;
  std::size_t peak_act_units = 0;
};

inline constexpr double kDivergenceLoss = 1e12;

// Record t describes iterate w_t (w_1 is the initial point) and the update
// taken from it. Perturbation i of iteration t is seeded by
// derive_seed(seed, t, i), so methods sharing a seed share directions.
RunResult convergence_experiment(const Problem& problem, Method method,
                                 const OptimizerConfig& opt,
                                 const EstimatorConfig& est, std::size_t T,
                                 std::uint64_t seed, RunOptions options = {});

// ---------------------------------------------------------------------------
// Estimator oracles

using EstimatorFn = std::function<GradEstimate(
    const Objective&, std::span<const double> w, std::uint64_t seed, FlopCounter&)>;

struct UnbiasednessReport {
  std::size_t trials = 0;
  std::vector<double> mean;
  std::vector<double> deviation;  // |mean - grad|
  std::vector<double> std_error;
  bool determinate = false;  // false below 100 trials
  bool pass = false;         // every deviation within 3 standard errors
};

UnbiasednessReport verify_unbiasedness(const EstimatorFn& estimator,
                                       const Objective& objective,
                                       std::span<const double> w,
                                       std::span<const double> true_grad,
                                       std::size_t trials, std::uint64_t seed);

struct VarianceEntry {
  std::size_t n = 1;
  double measured = 0.0;   // total variance of the n-sample mean
  double predicted = 0.0;  // (d + 1) / n * |grad|^2 + excess / n
  double relative_error = 0.0;
};

struct VarianceReport {
  std::size_t trials = 0;
  std::vector<VarianceEntry> entries;
};

// `excess` is an additive per-sample term (the eps^2 contribution for ZO).
VarianceReport verify_variance(const EstimatorFn& estimator,
                               const Objective& objective,
                               std::span<const double> w,
                               std::span<const double> true_grad,
                               std::span<const std::size_t> n_values,
                               std::size_t trials, std::uint64_t seed,
                               double excess = 0.0);

// Mean of |g_hat|^2 over `trials` single-sample estimates.
double measure_second_moment(const EstimatorFn& estimator, const Objective& objective,
                             std::span<const double> w, std::size_t trials,
                             std::uint64_t seed);

// Single-perturbation FmAD / ZO estimators with v ~ N(0, sigma2 I).
EstimatorFn fmad_estimator(double sigma2 = 1.0);
EstimatorFn zo_estimator(double epsilon, double sigma2 = 1.0);

// ---------------------------------------------------------------------------
// Convergence bounds

struct BoundInputs {
  double L = 1.0;
  double eta = 0.0;
  std::size_t d = 1;
  std::size_t n = 1;
  std::size_t T = 1;
  double f_first = 0.0;
  double f_last = 0.0;
  double epsilon = 0.0;
};

struct TheoryBound {
  Family method = Family::kBp;
  double rhs = 0.0;
  BoundInputs inputs;
};

// Right-hand side of the min_t |grad f(w_t)|^2 bound. Throws ThresholdError
// when eta is outside the method's admissible range.
TheoryBound theorem_bound(Family method, const BoundInputs& inputs);

// Bound whose f(w_1) - f(w_T) is the mean over the given runs.
TheoryBound ensemble_bound(Family method,
                           const std::vector<std::vector<RunRecord>>& runs,
                           BoundInputs inputs);

struct BoundCheck {
  double measured = 0.0;  // mean over runs of min_t grad_norm_sq
  double rhs = 0.0;
  bool pass = false;
};

BoundCheck check_bound(const std::vector<std::vector<RunRecord>>& runs,
                       const TheoryBound& bound);

// ---------------------------------------------------------------------------
// jvp spikes

struct SpikeSummary {
  std::vector<std::size_t> spike_iterations;
  double max_over_median = 0.0;
};

inline constexpr double kSpikeFactor = 10.0;

// Flags iterations whose |jvp_max| exceeds kSpikeFactor times the median of
// all earlier |jvp_max| values. Records without jvp stats are skipped.
SpikeSummary jvp_spike_report(std::span<const RunRecord> records);

struct LabelledSpikes {
  OptimizerKind optimizer = OptimizerKind::kSgd;
  SpikeSummary summary;
};

// Spike counts per run, grouped by optimizer name.
std::map<std::string, std::vector<std::size_t>> cross_tabulate(
    std::span<const LabelledSpikes> runs);

}  // namespace gradbench

#endif  // GRADBENCH_ANALYSIS_H_
