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

#include "gradbench/variants.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/forward_ad.h"
#include "gradbench/random.h"
#include "gradbench/zero_order.h"

namespace gradbench {
namespace {

std::string base_name(BaseEstimator base) {
  return base == BaseEstimator::kFmad ? "fmad" : "zo";
}

void normalize(std::vector<double>& v) {
  const double norm = std::sqrt(norm_sq(v));
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
}

}  // namespace

ExecutionMode parse_execution_mode(std::string_view name) {
  if (name == "sequential") return ExecutionMode::kSequential;
  if (name == "parallel") return ExecutionMode::kParallel;
  throw ConfigError("unknown mode '" + std::string(name) +
                    "' (expected sequential or parallel)");
}

std::string execution_mode_name(ExecutionMode mode) {
  return mode == ExecutionMode::kSequential ? "sequential" : "parallel";
}

void EstimatorConfig::validate() const {
  if (n == 0) throw ConfigError("n must be at least 1");
  if (accumulation_window == 0) throw ConfigError("accumulation_window must be at least 1");
  if (svrg_interval == 0) throw ConfigError("svrg_interval must be at least 1");
  if (svrg_full_n == 0) throw ConfigError("svrg_full_n must be at least 1");
  if (!(sparse_fraction > 0.0 && sparse_fraction <= 1.0)) {
    throw ConfigError("sparse_fraction must lie in (0, 1]");
  }
  if (adaptive_calibration_count == 0) {
    throw ConfigError("adaptive_calibration_count must be at least 1");
  }
  if (!(rolling_beta >= 0.0 && rolling_beta <= 1.0)) {
    throw ConfigError("rolling_beta must lie in [0, 1]");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
}

GradEstimate base_estimate(const Objective& objective, std::span<const double> w,
                           const Direction& v, const EstimatorConfig& cfg,
                           FlopCounter& fc) {
  if (cfg.base == BaseEstimator::kFmad) return fmad_estimate(objective, w, v, fc);
  return zo_estimate(objective, w, v, ZoConfig{cfg.epsilon}, fc);
}

GradEstimate estimate_multiple(const Objective& objective, std::span<const double> w,
                               const EstimatorConfig& cfg,
                               std::span<const Perturbation> perturbations,
                               FlopCounter& fc,
                               const std::vector<std::size_t>* mask) {
  const std::size_t n = perturbations.size();
  if (n == 0) throw ConfigError("estimate_multiple needs at least one perturbation");
  auto direction = [&](std::size_t i) {
    return mask ? SeededDirection(perturbations[i], *mask)
                : SeededDirection(perturbations[i]);
  };
  auto run_one = [&](std::size_t i, FlopCounter& counter) {
    try {
      return base_estimate(objective, w, direction(i), cfg, counter);
    } catch (const OverflowError& e) {
      throw OverflowError(std::string(e.what()) + " (perturbation " +
                          std::to_string(i) + ")");
    }
  };
  if (n == 1) {
    GradEstimate est = run_one(0, fc);
    est.method = base_name(cfg.base);
    return est;
  }

  const std::uint64_t start = fc.total();
  GradEstimate out;
  out.method = base_name(cfg.base) + "-multiple";
  out.n = n;
  out.epsilon = cfg.base == BaseEstimator::kZo ? cfg.epsilon : 0.0;
  double loss_sum = 0.0;
  auto fold = [&](std::size_t i, GradEstimate& est) {
    if (i == 0) {
      out.g = std::move(est.g);
    } else {
      for (std::size_t k = 0; k < out.g.size(); ++k) out.g[k] += est.g[k];
      fc.add(out.g.size());
    }
    out.jvps.push_back(est.jvps.front());
    loss_sum += est.loss;
  };

  if (cfg.mode == ExecutionMode::kSequential) {
    for (std::size_t i = 0; i < n; ++i) {
      GradEstimate est = run_one(i, fc);
      out.peak_activation_units =
          std::max(out.peak_activation_units, est.peak_activation_units);
      fold(i, est);
    }
  } else {
    std::vector<GradEstimate> results(n);
    std::vector<FlopCounter> counters(n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      workers.emplace_back([&, i] {
        try {
          results[i] = run_one(i, counters[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (std::thread& t : workers) t.join();
    for (std::size_t i = 0; i < n; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      fc.merge(counters[i]);
      // Every worker holds its own pass at the same time.
      out.peak_activation_units += results[i].peak_activation_units;
      fold(i, results[i]);
    }
  }
  const double inv = static_cast<double>(n);
  for (double& gk : out.g) gk /= inv;
  fc.add(out.g.size());
  out.loss = loss_sum / inv;
  out.flops = fc.total() - start;
  return out;
}

Accumulator::Accumulator(std::size_t window, std::size_t dim)
    : window_(window), sum_(dim, 0.0) {
  if (window_ == 0) throw ConfigError("accumulation window must be at least 1");
}

std::optional<std::vector<double>> Accumulator::push(std::span<const double> g) {
  if (g.size() != sum_.size()) throw ShapeError("accumulated gradient length mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) sum_[i] += g[i];
  if (++count_ < window_) return std::nullopt;
  std::vector<double> mean(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    mean[i] = sum_[i] / static_cast<double>(window_);
  }
  std::fill(sum_.begin(), sum_.end(), 0.0);
  count_ = 0;
  ++emitted_;
  return mean;
}

CalibrationResult adaptive_calibrate(AdaptiveState& state, const Objective& objective,
                                     std::span<const double> w,
                                     std::span<const Direction* const> candidates,
                                     const EstimatorConfig& cfg, FlopCounter& fc) {
  if (candidates.empty()) throw ConfigError("calibration needs at least one candidate");
  const std::uint64_t start = fc.total();
  CalibrationResult result;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    GradEstimate est = base_estimate(objective, w, *candidates[i], cfg, fc);
    peak = std::max(peak, est.peak_activation_units);
    if (i == 0 || est.jvps.front() > result.estimate.jvps.front()) {
      result.selected = i;
      result.estimate = std::move(est);
    }
  }
  state.fallback = !(result.estimate.jvps.front() > 0.0);
  state.direction_estimate = candidates[result.selected]->materialize();
  normalize(state.direction_estimate);
  state.calibrated = true;
  result.estimate.method = base_name(cfg.base) + "-adaptive";
  result.estimate.calibration_fallback = state.fallback;
  result.estimate.peak_activation_units = peak;
  result.estimate.flops = fc.total() - start;
  return result;
}

DenseDirection adaptive_next(AdaptiveState& state,
                             std::span<const double> last_grad_estimate,
                             std::span<const double> v_new, double beta) {
  if (!state.calibrated) throw std::logic_error("adaptive sampling before calibration");
  const std::size_t d = state.direction_estimate.size();
  if (last_grad_estimate.size() != d || v_new.size() != d) {
    throw ShapeError("adaptive direction length mismatch");
  }
  std::vector<double> last(last_grad_estimate.begin(), last_grad_estimate.end());
  if (norm_sq(last) > 0.0) {
    normalize(last);
    state.direction_estimate = std::move(last);
  }
  std::vector<double> fresh(v_new.begin(), v_new.end());
  normalize(fresh);
  std::vector<double> mixed(d);
  for (std::size_t i = 0; i < d; ++i) {
    mixed[i] = beta * state.direction_estimate[i] + (1.0 - beta) * fresh[i];
  }
  if (norm_sq(mixed) == 0.0) mixed = fresh;
  normalize(mixed);
  const double scale = std::sqrt(static_cast<double>(d));
  for (double& x : mixed) x *= scale;
  return DenseDirection(std::move(mixed));
}

SvrgState svrg_refresh(const Problem& problem, std::span<const double> w,
                       const EstimatorConfig& cfg, std::uint64_t seed,
                       FlopCounter& fc) {
  const std::size_t batches = problem.num_batches();
  const std::size_t d = w.size();
  SvrgState state;
  state.snapshot.assign(w.begin(), w.end());
  state.mu.assign(d, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t j = 0; j < cfg.svrg_full_n; ++j) {
      const SeededDirection v(Perturbation{derive_seed(seed, b, j), cfg.sigma2, d});
      const GradEstimate est = base_estimate(problem.batch(b), w, v, cfg, fc);
      for (std::size_t k = 0; k < d; ++k) state.mu[k] += est.g[k];
      fc.add(d);
    }
  }
  const double count = static_cast<double>(batches * cfg.svrg_full_n);
  for (double& m : state.mu) m /= count;
  fc.add(d);
  state.period = cfg.svrg_interval * batches;
  return state;
}

GradEstimate svrg_estimate(const Objective& objective, std::span<const double> w,
                           SvrgState& state, const Direction& v,
                           const EstimatorConfig& cfg, FlopCounter& fc) {
  if (state.age > state.period) {
    throw StaleSnapshotError("svrg snapshot is " + std::to_string(state.age) +
                             " iterations old, refresh period is " +
                             std::to_string(state.period));
  }
  if (state.snapshot.size() != w.size() || state.mu.size() != w.size()) {
    throw ShapeError("svrg state does not match the parameter length");
  }
  const std::uint64_t start = fc.total();
  const GradEstimate current = base_estimate(objective, w, v, cfg, fc);
  const GradEstimate anchor = base_estimate(objective, state.snapshot, v, cfg, fc);
  GradEstimate out;
  out.method = base_name(cfg.base) + "-svrg";
  out.epsilon = current.epsilon;
  out.g.resize(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    out.g[k] = (current.g[k] - anchor.g[k]) + state.mu[k];
  }
  fc.add(2 * w.size());
  out.jvps = {current.jvps.front(), anchor.jvps.front()};
  out.loss = current.loss;
  out.peak_activation_units =
      std::max(current.peak_activation_units, anchor.peak_activation_units);
  out.flops = fc.total() - start;
  ++state.age;
  return out;
}

std::vector<std::size_t> sparse_mask(std::span<const double> w, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("sparse fraction must lie in (0, 1]");
  }
  const std::size_t d = w.size();
  if (d == 0) return {};
  const double exact = fraction * static_cast<double>(d);
  const double nearest = std::round(exact);
  // 0.07 * 100 evaluates to 7.000000000000001; do not round that up to 8.
  double want = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)
                    ? nearest
                    : std::ceil(exact);
  const std::size_t k =
      std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, d);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      const double ma = std::abs(w[a]);
                      const double mb = std::abs(w[b]);
                      return ma > mb || (ma == mb && a < b);
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace gradbench
