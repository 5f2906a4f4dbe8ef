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

#include "gradbench/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/forward_ad.h"
#include "gradbench/random.h"
#include "gradbench/zero_order.h"

namespace gradbench {
namespace {

constexpr std::uint64_t kSvrgStream = 0x5B76;

const char* family_name(Family f) {
  switch (f) {
    case Family::kBp:
      return "bp";
    case Family::kFmad:
      return "fmad";
    case Family::kZo:
      return "zo";
  }
  return "?";
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kVanilla:
      return "vanilla";
    case Variant::kCheckpointing:
      return "checkpointing";
    case Variant::kAccumulate:
      return "accumulate";
    case Variant::kMultiple:
      return "multiple";
    case Variant::kAdaptive:
      return "adaptive";
    case Variant::kSvrg:
      return "svrg";
    case Variant::kSparse:
      return "sparse";
  }
  return "?";
}

bool diverging(double loss) { return !std::isfinite(loss) || loss > kDivergenceLoss; }

double median_of_sorted(const std::vector<double>& sorted) {
  const std::size_t m = sorted.size();
  if (m == 0) return kNaN;
  return m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
}

// Running per-coordinate mean and sum of squared deviations (Welford).
struct Moments {
  explicit Moments(std::size_t d) : mean(d, 0.0), m2(d, 0.0) {}
  void add(std::span<const double> x) {
    ++count;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double delta = x[k] - mean[k];
      mean[k] += delta / static_cast<double>(count);
      m2[k] += delta * (x[k] - mean[k]);
    }
  }
  double variance(std::size_t k) const {
    return count > 1 ? m2[k] / static_cast<double>(count - 1) : 0.0;
  }
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;
};

}  // namespace

Method Method::parse(std::string_view name) {
  for (Family f : {Family::kBp, Family::kFmad, Family::kZo}) {
    for (Variant v : {Variant::kVanilla, Variant::kCheckpointing, Variant::kAccumulate,
                      Variant::kMultiple, Variant::kAdaptive, Variant::kSvrg,
                      Variant::kSparse}) {
      const Method m{f, v};
      if (m.name() == name) {
        const auto& roster = method_names();
        if (std::find(roster.begin(), roster.end(), m.name()) != roster.end()) return m;
      }
    }
  }
  std::string list;
  for (const std::string& m : method_names()) list += (list.empty() ? "" : ", ") + m;
  throw ConfigError("unknown method '" + std::string(name) + "'; expected one of: " +
                    list);
}

std::string Method::name() const {
  return std::string(family_name(family)) + "-" + variant_name(variant);
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {
      "bp-vanilla",      "bp-checkpointing", "bp-accumulate",   "zo-vanilla",
      "zo-multiple",     "zo-accumulate",    "zo-adaptive",     "zo-svrg",
      "zo-sparse",       "fmad-vanilla",     "fmad-multiple",   "fmad-accumulate",
      "fmad-adaptive",   "fmad-svrg",        "fmad-sparse",
  };
  return names;
}

RunResult convergence_experiment(const Problem& problem, Method method,
                                 const OptimizerConfig& opt_cfg,
                                 const EstimatorConfig& est_cfg, std::size_t T,
                                 std::uint64_t seed, RunOptions options) {
  Method::parse(method.name());
  opt_cfg.validate();
  EstimatorConfig cfg = est_cfg;
  cfg.base = method.family == Family::kZo ? BaseEstimator::kZo : BaseEstimator::kFmad;
  cfg.validate();

  const Objective& full = problem.full();
  const std::size_t d = full.dim();
  const std::size_t batches = problem.num_batches();
  std::vector<double> w = problem.initial_point(seed);
  if (w.size() != d) throw ShapeError("initial point has the wrong length");

  Optimizer optimizer(opt_cfg, d);
  std::optional<Accumulator> accumulator;
  if (method.variant == Variant::kAccumulate) {
    accumulator.emplace(cfg.accumulation_window, d);
  }
  AdaptiveState adaptive;
  std::vector<double> last_g;
  std::optional<SvrgState> svrg;

  RunResult result;
  std::uint64_t flops_cum = 0;
  std::size_t peak = 0;
  auto perturbation = [&](std::size_t t, std::size_t i) {
    return Perturbation{derive_seed(seed, t, i), cfg.sigma2, d};
  };

  for (std::size_t t = 1; t <= T; ++t) {
    RunRecord rec;
    rec.iter = t;
    if (options.telemetry) {
      rec.loss = full.value(w);
      rec.grad_norm_sq = diverging(rec.loss) ? kNaN : norm_sq(full.grad(w));
      if (diverging(rec.loss)) {
        rec.flops_cum = flops_cum;
        rec.peak_act_units = peak;
        result.records.push_back(rec);
        result.diverged = true;
        result.divergence_reason = "loss exceeded the divergence threshold at iteration " +
                                   std::to_string(t);
        break;
      }
    }

    const Objective& obj = problem.batch((t - 1) % batches);
    FlopCounter fc;
    GradEstimate g;
    std::vector<std::size_t> mask;
    try {
      if (method.family == Family::kBp) {
        g.g.assign(d, 0.0);
        const GradientEval ge = method.variant == Variant::kCheckpointing
                                    ? obj.gradient_checkpointed(w, g.g, fc)
                                    : obj.gradient(w, g.g, fc);
        g.loss = ge.loss;
        g.peak_activation_units = ge.peak_activation_units;
      } else {
        switch (method.variant) {
          case Variant::kVanilla:
          case Variant::kAccumulate: {
            const Perturbation p = perturbation(t, 0);
            g = estimate_multiple(obj, w, cfg, std::span(&p, 1), fc);
            break;
          }
          case Variant::kMultiple:
          case Variant::kSparse: {
            std::vector<Perturbation> ps;
            for (std::size_t i = 0; i < cfg.n; ++i) ps.push_back(perturbation(t, i));
            if (method.variant == Variant::kSparse) {
              mask = sparse_mask(w, cfg.sparse_fraction);
              g = estimate_multiple(obj, w, cfg, ps, fc, &mask);
            } else {
              g = estimate_multiple(obj, w, cfg, ps, fc);
            }
            break;
          }
          case Variant::kAdaptive: {
            if (!adaptive.calibrated) {
              std::vector<SeededDirection> candidates;
              for (std::size_t i = 0; i < cfg.adaptive_calibration_count; ++i) {
                candidates.emplace_back(perturbation(t, i));
              }
              std::vector<const Direction*> ptrs;
              for (const auto& c : candidates) ptrs.push_back(&c);
              g = adaptive_calibrate(adaptive, obj, w, ptrs, cfg, fc).estimate;
            } else {
              const std::vector<double> fresh = regenerate(perturbation(t, 0));
              const DenseDirection dir =
                  adaptive_next(adaptive, last_g, fresh, cfg.rolling_beta);
              g = base_estimate(obj, w, dir, cfg, fc);
              g.calibration_fallback = adaptive.fallback;
            }
            last_g = g.g;
            break;
          }
          case Variant::kSvrg: {
            if (!svrg || svrg->age >= svrg->period) {
              svrg = svrg_refresh(problem, w, cfg,
                                  derive_seed(seed, kSvrgStream, t), fc);
            }
            g = svrg_estimate(obj, w, *svrg, SeededDirection(perturbation(t, 0)), cfg,
                              fc);
            break;
          }
          case Variant::kCheckpointing:
            throw ConfigError(method.name() + " is not a valid method");
        }
      }
    } catch (const OverflowError& e) {
      rec.flops_cum = flops_cum;
      rec.peak_act_units = peak;
      result.records.push_back(rec);
      result.diverged = true;
      result.divergence_reason =
          "iteration " + std::to_string(t) + ": " + std::string(e.what());
      break;
    }

    flops_cum += fc.total();
    peak = std::max(peak, g.peak_activation_units);
    rec.flops_cum = flops_cum;
    rec.peak_act_units = peak;
    if (!g.jvps.empty()) {
      double sum = 0.0;
      double mx = 0.0;
      for (double s : g.jvps) {
        sum += std::abs(s);
        mx = std::max(mx, std::abs(s));
      }
      rec.jvp_mean = sum / static_cast<double>(g.jvps.size());
      rec.jvp_max = mx;
    }

    if (!options.telemetry && diverging(g.loss)) {
      result.records.push_back(rec);
      result.diverged = true;
      result.divergence_reason = "minibatch loss exceeded the divergence threshold at "
                                 "iteration " + std::to_string(t);
      break;
    }

    try {
      if (accumulator) {
        if (auto mean = accumulator->push(g.g)) {
          rec.update_norm = optimizer.step(w, *mean).update_norm;
        }
      } else {
        rec.update_norm = optimizer.step(w, g.g, mask).update_norm;
      }
    } catch (const OverflowError& e) {
      result.records.push_back(rec);
      result.diverged = true;
      result.divergence_reason =
          "iteration " + std::to_string(t) + ": " + std::string(e.what());
      break;
    }
    result.records.push_back(rec);
  }

  result.final_w = w;
  result.flops_total = flops_cum;
  result.peak_act_units = peak;
  bool finite_w = true;
  for (double x : w) finite_w = finite_w && std::isfinite(x);
  if (finite_w) {
    result.final_loss = full.value(w);
    if (std::isfinite(result.final_loss)) result.final_accuracy = problem.accuracy(w);
  }
  if (!result.diverged && diverging(result.final_loss)) {
    result.diverged = true;
    result.divergence_reason = "final loss exceeded the divergence threshold";
  }
  return result;
}

UnbiasednessReport verify_unbiasedness(const EstimatorFn& estimator,
                                       const Objective& objective,
                                       std::span<const double> w,
                                       std::span<const double> true_grad,
                                       std::size_t trials, std::uint64_t seed) {
  const std::size_t d = objective.dim();
  if (true_grad.size() != d) throw ShapeError("true gradient length mismatch");
  Moments moments(d);
  for (std::size_t i = 0; i < trials; ++i) {
    FlopCounter fc;
    moments.add(estimator(objective, w, derive_seed(seed, i), fc).g);
  }
  UnbiasednessReport report;
  report.trials = trials;
  report.mean = moments.mean;
  report.determinate = trials >= 100;
  report.pass = report.determinate;
  for (std::size_t k = 0; k < d; ++k) {
    const double se = std::sqrt(moments.variance(k) / static_cast<double>(trials));
    const double dev = std::abs(moments.mean[k] - true_grad[k]);
    report.deviation.push_back(dev);
    report.std_error.push_back(se);
    if (!(dev <= 3.0 * se)) report.pass = false;
  }
  return report;
}

VarianceReport verify_variance(const EstimatorFn& estimator,
                               const Objective& objective,
                               std::span<const double> w,
                               std::span<const double> true_grad,
                               std::span<const std::size_t> n_values,
                               std::size_t trials, std::uint64_t seed,
                               double excess) {
  const std::size_t d = objective.dim();
  const double g2 = norm_sq(true_grad);
  VarianceReport report;
  report.trials = trials;
  std::vector<double> mean(d);
  for (std::size_t n : n_values) {
    Moments moments(d);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      std::fill(mean.begin(), mean.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        FlopCounter fc;
        const GradEstimate est =
            estimator(objective, w, derive_seed(seed, n, trial, i), fc);
        for (std::size_t k = 0; k < d; ++k) mean[k] += est.g[k];
      }
      for (double& m : mean) m /= static_cast<double>(n);
      moments.add(mean);
    }
    VarianceEntry entry;
    entry.n = n;
    for (std::size_t k = 0; k < d; ++k) entry.measured += moments.variance(k);
    entry.predicted =
        (static_cast<double>(d + 1) * g2 + excess) / static_cast<double>(n);
    entry.relative_error = std::abs(entry.measured - entry.predicted) / entry.predicted;
    report.entries.push_back(entry);
  }
  return report;
}

double measure_second_moment(const EstimatorFn& estimator, const Objective& objective,
                             std::span<const double> w, std::size_t trials,
                             std::uint64_t seed) {
  double acc = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    FlopCounter fc;
    acc += norm_sq(estimator(objective, w, derive_seed(seed, i), fc).g);
  }
  return acc / static_cast<double>(trials);
}

EstimatorFn fmad_estimator(double sigma2) {
  return [sigma2](const Objective& obj, std::span<const double> w, std::uint64_t seed,
                  FlopCounter& fc) {
    return fmad_estimate(obj, w, SeededDirection({seed, sigma2, obj.dim()}), fc);
  };
}

EstimatorFn zo_estimator(double epsilon, double sigma2) {
  return [epsilon, sigma2](const Objective& obj, std::span<const double> w,
                           std::uint64_t seed, FlopCounter& fc) {
    return zo_estimate(obj, w, SeededDirection({seed, sigma2, obj.dim()}),
                       ZoConfig{epsilon}, fc);
  };
}

TheoryBound theorem_bound(Family method, const BoundInputs& in) {
  if (!(in.L > 0.0) || in.T == 0 || in.d == 0 || in.n == 0) {
    throw ThresholdError("bound needs L > 0 and positive T, d, n");
  }
  TheoryBound bound{method, 0.0, in};
  const double T = static_cast<double>(in.T);
  const double gap = in.f_first - in.f_last;
  if (method == Family::kBp) {
    if (!(in.eta > 0.0 && in.eta <= bp_max_eta(in.L))) {
      throw ThresholdError("eta " + std::to_string(in.eta) +
                           " is outside (0, 1/L] for exact gradient descent");
    }
    bound.rhs = 2.0 * in.L / T * gap;
    return bound;
  }
  const double spread = 1.0 + static_cast<double>(in.d + 1) / static_cast<double>(in.n);
  const double bracket = 1.0 - in.L * in.eta / 2.0 * spread;
  if (!(in.eta > 0.0) || !(bracket > 0.0)) {
    throw ThresholdError("eta " + std::to_string(in.eta) +
                         " is not below the stable threshold " +
                         std::to_string(max_stable_eta(in.L, in.d, in.n)));
  }
  bound.rhs = gap / (in.eta * T * bracket);
  if (method == Family::kZo) {
    bound.rhs += in.L * static_cast<double>(in.d) * in.eta * in.eta /
                 (2.0 * static_cast<double>(in.n)) * in.epsilon * in.epsilon;
  }
  return bound;
}

TheoryBound ensemble_bound(Family method,
                           const std::vector<std::vector<RunRecord>>& runs,
                           BoundInputs inputs) {
  if (runs.empty()) throw ConfigError("ensemble bound needs at least one run");
  double first = 0.0;
  double last = 0.0;
  for (const auto& records : runs) {
    if (records.empty()) throw ConfigError("ensemble bound needs non-empty runs");
    first += records.front().loss;
    last += records.back().loss;
  }
  inputs.f_first = first / static_cast<double>(runs.size());
  inputs.f_last = last / static_cast<double>(runs.size());
  inputs.T = runs.front().size();
  return theorem_bound(method, inputs);
}

BoundCheck check_bound(const std::vector<std::vector<RunRecord>>& runs,
                       const TheoryBound& bound) {
  BoundCheck check;
  check.rhs = bound.rhs;
  if (runs.empty()) return check;
  double total = 0.0;
  for (const auto& records : runs) {
    double best = std::numeric_limits<double>::infinity();
    for (const RunRecord& r : records) {
      if (std::isfinite(r.grad_norm_sq)) best = std::min(best, r.grad_norm_sq);
    }
    total += best;
  }
  check.measured = total / static_cast<double>(runs.size());
  check.pass = check.measured <= check.rhs;
  return check;
}

SpikeSummary jvp_spike_report(std::span<const RunRecord> records) {
  SpikeSummary summary;
  std::vector<double> earlier;  // kept sorted
  double max_value = 0.0;
  for (const RunRecord& r : records) {
    if (!std::isfinite(r.jvp_max)) continue;
    const double value = std::abs(r.jvp_max);
    if (!earlier.empty() && value > kSpikeFactor * median_of_sorted(earlier)) {
      summary.spike_iterations.push_back(r.iter);
    }
    earlier.insert(std::upper_bound(earlier.begin(), earlier.end(), value), value);
    max_value = std::max(max_value, value);
  }
  const double median = median_of_sorted(earlier);
  summary.max_over_median =
      earlier.empty() ? 0.0 : (median > 0.0 ? max_value / median
                                            : std::numeric_limits<double>::infinity());
  return summary;
}

std::map<std::string, std::vector<std::size_t>> cross_tabulate(
    std::span<const LabelledSpikes> runs) {
  std::map<std::string, std::vector<std::size_t>> table;
  for (const LabelledSpikes& run : runs) {
    table[optimizer_name(run.optimizer)].push_back(run.summary.spike_iterations.size());
  }
  return table;
}

}  // namespace gradbench
