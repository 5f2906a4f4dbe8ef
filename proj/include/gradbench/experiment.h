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

// Experiment configuration, orchestration, and CSV / JSON emission.
//
// Configs are sectioned key=value text:
//
//   [experiment]  method, iterations, seed, output, telemetry
//   [objective]   kind (quadratic | ill-conditioned | linear | blobs |
//                 regression), d, L, condition, gradient, init_scale,
//                 samples, classes, separation, batch_size, noise, data_seed
//   [model]       spec, checkpoint_segment
//   [optimizer]   kind, eta, momentum, beta1, beta2, weight_decay, eps
//   [estimator]   n, mode, epsilon, sigma2, accumulation_window,
//                 svrg_interval, svrg_full_n, sparse_fraction,
//                 adaptive_calibration_count, rolling_beta
//   [sweep]       axis, values
//
// '#' starts a comment. Multiple-perturbation methods default to n = 10.

#ifndef GRADBENCH_EXPERIMENT_H_
#define GRADBENCH_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradbench/analysis.h"
#include "gradbench/objective.h"
#include "gradbench/optim.h"
#include "gradbench/variants.h"

namespace gradbench {

struct ObjectiveConfig {
  std::string kind = "quadratic";
  std::size_t d = 10;
  double L = 1.0;
  double condition = 100.0;
  std::vector<double> gradient;  // linear objective; defaults to e_1
  double init_scale = 1.0;
  std::size_t samples = 256;
  std::size_t classes = 4;
  double separation = 1.0;
  std::size_t batch_size = 32;
  double noise = 0.1;
  std::uint64_t data_seed = 0;
};

struct ExperimentConfig {
  Method method;
  std::size_t iterations = 100;
  std::uint64_t seed = 0;
  std::string output = "run.csv";
  bool telemetry = true;
  ObjectiveConfig objective;
  std::string model;  // empty: derived from the objective where possible
  std::optional<std::size_t> checkpoint_segment;
  OptimizerConfig optimizer;
  EstimatorConfig estimator;
  std::string sweep_axis;
  std::vector<double> sweep_values;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

ExperimentConfig parse_config(std::string_view text);
std::string serialize_config(const ExperimentConfig& cfg);

std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg);

RunResult run_experiment(const ExperimentConfig& cfg);

// Perturbations per estimate as reported in the CSV (0 for backpropagation).
std::size_t effective_n(const ExperimentConfig& cfg);

inline constexpr const char* kCsvHeader =
    "iter,loss,grad_norm_sq,jvp_mean,jvp_max,flops_cum,peak_act_units,"
    "update_norm,method,n,eta,seed";

// Round-trip exact decimal form (17 significant digits).
std::string format_double(double x);

void write_csv(std::ostream& out, const ExperimentConfig& cfg, const RunResult& result);
std::string to_csv(const ExperimentConfig& cfg, const RunResult& result);

// Writes `path`, throwing std::runtime_error if it cannot be opened.
void write_file(const std::string& path, const std::string& contents);

struct SweepPoint {
  std::string point;  // "eta=0.01"
  std::string csv_path;
  double final_loss = kNaN;
  bool diverged = false;
  std::uint64_t flops_total = 0;
  std::size_t peak_act_units = 0;
  double wall_ms = 0.0;
};

// Applies `value` on `axis` to a copy of `base`. Throws ConfigError when the
// axis does not apply to the method or objective.
ExperimentConfig sweep_config(const ExperimentConfig& base, std::string_view axis,
                              double value);

// Runs every point (up to `workers` at once), writes one CSV per point into
// `out_dir` and summary.json after all points finish.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, std::string_view axis,
                                  const std::vector<double>& values,
                                  const std::string& out_dir, std::size_t workers);

std::string sweep_summary_json(const std::vector<SweepPoint>& points);

}  // namespace gradbench

#endif  // GRADBENCH_EXPERIMENT_H_
