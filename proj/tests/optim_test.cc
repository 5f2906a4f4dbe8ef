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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gradbench/errors.h"
#include "gradbench/optim.h"

namespace gradbench {
namespace {

TEST(Sgd, SingleStep) {
  OptimizerConfig cfg;
  cfg.eta = 0.1;
  Optimizer opt(cfg, 1);
  std::vector<double> w = {1.0};
  const StepStats s = opt.step(w, std::vector<double>{2.0});
  EXPECT_DOUBLE_EQ(w[0], 0.8);
  EXPECT_DOUBLE_EQ(s.update_norm, 0.2);
  EXPECT_DOUBLE_EQ(s.effective_gradient_norm, 2.0);
}

TEST(AdamW, FirstStepByHand) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kAdamw;
  cfg.eta = 0.1;
  Optimizer opt(cfg, 1);
  std::vector<double> w = {0.0};
  opt.step(w, std::vector<double>{1.0});
  // m_hat = 1, v_hat = 1.
  EXPECT_DOUBLE_EQ(w[0], -0.1 * 1.0 / (1.0 + 1e-8));
}

TEST(AdamW, SecondStepByHand) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kAdamw;
  cfg.eta = 0.05;
  cfg.weight_decay = 0.1;
  Optimizer opt(cfg, 1);
  std::vector<double> w = {1.0};
  opt.step(w, std::vector<double>{2.0});
  opt.step(w, std::vector<double>{-1.0});
  double x = 1.0;
  double m = 0.0;
  double v = 0.0;
  const double gs[] = {2.0, -1.0};
  for (int t = 1; t <= 2; ++t) {
    const double g = gs[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    x = x - 0.05 * 0.1 * x - 0.05 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(w[0], x, 1e-15);
}

TEST(Nesterov, TwoStepsByHand) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kNesterov;
  cfg.eta = 0.1;
  cfg.momentum = 0.9;
  Optimizer opt(cfg, 1);
  std::vector<double> w = {1.0};
  opt.step(w, std::vector<double>{1.0});
  opt.step(w, std::vector<double>{1.0});
  // b1 = 1, update 1 + 0.9 = 1.9; b2 = 1.9, update 1 + 1.71 = 2.71.
  EXPECT_NEAR(w[0], 1.0 - 0.19 - 0.271, 1e-15);
}

TEST(Optimizer, ZeroGradientLeavesParams) {
  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdamw, OptimizerKind::kNesterov}) {
    OptimizerConfig cfg;
    cfg.kind = kind;
    Optimizer opt(cfg, 3);
    std::vector<double> w = {1, -2, 3};
    opt.step(w, std::vector<double>(3, 0.0));
    EXPECT_EQ(w, (std::vector<double>{1, -2, 3})) << optimizer_name(kind);
  }
}

TEST(Optimizer, NonFiniteGradientThrows) {
  Optimizer opt(OptimizerConfig{}, 2);
  std::vector<double> w = {1, 2};
  EXPECT_THROW(opt.step(w, std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()}),
               OverflowError);
}

TEST(Optimizer, MaskRestrictsUpdate) {
  Optimizer opt(OptimizerConfig{}, 4);
  std::vector<double> w = {1, 1, 1, 1};
  const std::vector<std::size_t> mask = {2};
  opt.step(w, std::vector<double>{5, 5, 5, 5}, mask);
  EXPECT_EQ(w, (std::vector<double>{1, 1, 0.95, 1}));
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig cfg;
  cfg.eta = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.eta = 0.1;
  cfg.beta2 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_optimizer_kind("rmsprop"), ConfigError);
  EXPECT_EQ(parse_optimizer_kind("adamw"), OptimizerKind::kAdamw);
}

TEST(MaxStableEta, Examples) {
  EXPECT_DOUBLE_EQ(max_stable_eta(1.0, 11, 1), 2.0 / 13.0);
  EXPECT_NEAR(max_stable_eta(1.0, 1000, 10), 2.0 / 101.1, 1e-15);
  EXPECT_NEAR(max_stable_eta(2.0, 10, 100000000), 1.0, 1e-6);
}

TEST(MaxStableEta, MonotoneInDAndN) {
  for (std::size_t d = 1; d < 300; ++d) {
    EXPECT_LT(max_stable_eta(1.0, d + 1, 5), max_stable_eta(1.0, d, 5));
  }
  for (std::size_t n = 1; n < 300; ++n) {
    EXPECT_GT(max_stable_eta(1.0, 64, n + 1), max_stable_eta(1.0, 64, n));
  }
}

TEST(BpMaxEta, ExamplesAndRatio) {
  EXPECT_EQ(bp_max_eta(2.0), 0.5);
  EXPECT_EQ(bp_max_eta(1.0), 1.0);
  // Ratio is (n + d + 1) / (2n): linear in d.
  const double r10 = bp_max_eta(1.0) / max_stable_eta(1.0, 10, 1);
  const double r100 = bp_max_eta(1.0) / max_stable_eta(1.0, 100, 1);
  const double r1000 = bp_max_eta(1.0) / max_stable_eta(1.0, 1000, 1);
  EXPECT_NEAR((r1000 - r100) / (r100 - r10), 10.0, 1e-9);
}

TEST(Thresholds, RejectBadInputs) {
  EXPECT_THROW(max_stable_eta(0.0, 10, 1), ThresholdError);
  EXPECT_THROW(max_stable_eta(1.0, 10, 0), ThresholdError);
  EXPECT_THROW(bp_max_eta(-1.0), ThresholdError);
}

}  // namespace
}  // namespace gradbench
