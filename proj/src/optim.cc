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

#include "gradbench/optim.h"

#include <cmath>

#include "gradbench/errors.h"

namespace gradbench {

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "nesterov") return OptimizerKind::kNesterov;
  if (name == "adamw") return OptimizerKind::kAdamw;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected sgd, nesterov or adamw)");
}

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kNesterov:
      return "nesterov";
    case OptimizerKind::kAdamw:
      return "adamw";
  }
  return "?";
}

void OptimizerConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adamw betas must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

Optimizer::Optimizer(OptimizerConfig cfg, std::size_t dim) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.kind != OptimizerKind::kSgd) m_.assign(dim, 0.0);
  if (cfg_.kind == OptimizerKind::kAdamw) v_.assign(dim, 0.0);
}

double Optimizer::update(std::size_t i, double w, double g) {
  switch (cfg_.kind) {
    case OptimizerKind::kSgd:
      return w - cfg_.eta * g;
    case OptimizerKind::kNesterov: {
      // buf = mu buf + g;  w -= eta (g + mu buf)
      m_[i] = cfg_.momentum * m_[i] + g;
      return w - cfg_.eta * (g + cfg_.momentum * m_[i]);
    }
    case OptimizerKind::kAdamw: {
      const double decayed = w - cfg_.eta * cfg_.weight_decay * w;
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m_[i] / bias1_;
      const double v_hat = v_[i] / bias2_;
      return decayed - cfg_.eta * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
  return w;
}

StepStats Optimizer::step(std::span<double> w, std::span<const double> g,
                          std::span<const std::size_t> mask) {
  if (w.size() != g.size()) {
    throw ShapeError("gradient length " + std::to_string(g.size()) +
                     " does not match parameters " + std::to_string(w.size()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw OverflowError("non-finite gradient at coordinate " + std::to_string(i));
    }
  }
  ++t_;
  if (cfg_.kind == OptimizerKind::kAdamw) {
    bias1_ = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    bias2_ = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  }
  double sq = 0.0;
  auto apply = [&](std::size_t i) {
    const double next = update(i, w[i], g[i]);
    const double delta = next - w[i];
    sq += delta * delta;
    w[i] = next;
  };
  if (mask.empty()) {
    for (std::size_t i = 0; i < w.size(); ++i) apply(i);
  } else {
    for (std::size_t i : mask) {
      if (i >= w.size()) throw ShapeError("mask index out of range");
      apply(i);
    }
  }
  StepStats stats;
  stats.update_norm = std::sqrt(sq);
  stats.effective_gradient_norm = stats.update_norm / cfg_.eta;
  return stats;
}

double max_stable_eta(double L, std::size_t d, std::size_t n) {
  if (!(L > 0.0) || d == 0 || n == 0) {
    throw ThresholdError("max_stable_eta needs L > 0, d >= 1, n >= 1");
  }
  return 2.0 / (L * (1.0 + static_cast<double>(d + 1) / static_cast<double>(n)));
}

double bp_max_eta(double L) {
  if (!(L > 0.0)) throw ThresholdError("bp_max_eta needs L > 0");
  return 1.0 / L;
}

}  // namespace gradbench
