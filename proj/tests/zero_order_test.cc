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
#include "gradbench/forward_ad.h"
#include "gradbench/model_objective.h"
#include "gradbench/random.h"
#include "gradbench/synthetic.h"
#include "gradbench/zero_order.h"

namespace gradbench {
namespace {

// Scalar f(w) = w^3, or +inf for w > limit.
class Cubic : public Objective {
 public:
  explicit Cubic(double limit = std::numeric_limits<double>::infinity()) : limit_(limit) {}
  std::size_t dim() const override { return 1; }
  LossEval loss(std::span<const double> w, const Direction* dir, double scale,
                FlopCounter&) const override {
    double x = w[0];
    if (dir != nullptr) x += scale * dir->materialize()[0];
    if (x > limit_) return {std::numeric_limits<double>::infinity(), 1};
    return {x * x * x, 1};
  }
  JvpResult jvp(std::span<const double> w, const Direction& dir, FlopCounter&) const override {
    return {3 * w[0] * w[0] * dir.materialize()[0], w[0] * w[0] * w[0], 2, 0};
  }
  GradientEval gradient(std::span<const double> w, std::span<double> out,
                        FlopCounter&) const override {
    out[0] = 3 * w[0] * w[0];
    return {w[0] * w[0] * w[0], 1};
  }

 private:
  double limit_;
};

Batch random_batch(const Model& m, std::size_t rows, std::uint64_t seed) {
  Tensor x({rows, m.input_dim()});
  Tensor t({rows, m.output_dim()});
  fill_normal(derive_seed(seed, 1), 0, x.data());
  fill_normal(derive_seed(seed, 2), 0, t.data());
  return {std::move(x), std::move(t)};
}

TEST(Regenerate, DeterministicPerSeed) {
  EXPECT_EQ(regenerate({0, 1.0, 32}), regenerate({0, 1.0, 32}));
  EXPECT_NE(regenerate({0, 1.0, 32}), regenerate({1, 1.0, 32}));
}

TEST(Regenerate, Sigma2ScalesVariance) {
  const std::vector<double> a = regenerate({9, 1.0, 100});
  const std::vector<double> b = regenerate({9, 4.0, 100});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(b[i], 2.0 * a[i]);
}

TEST(Regenerate, GeneratorMoments) {
  const std::vector<double> v = regenerate({123, 1.0, 1000000});
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(SeededDirection, SliceMatchesWhole) {
  const SeededDirection v({5, 1.0, 40});
  const std::vector<double> whole = v.materialize();
  std::vector<double> part(10);
  v.fill(25, part);
  for (std::size_t i = 0; i < part.size(); ++i) EXPECT_EQ(part[i], whole[25 + i]);
}

TEST(SeededDirection, MaskZerosOutsideIndices) {
  const SeededDirection v({5, 1.0, 6}, std::vector<std::size_t>{1, 4});
  const std::vector<double> dense = regenerate({5, 1.0, 6});
  const std::vector<double> masked = v.materialize();
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(masked[i], (i == 1 || i == 4) ? dense[i] : 0.0);
  }
}

TEST(ZoEstimate, ExactOnQuadratic) {
  const auto quad = make_quadratic(1, 1.0);
  for (double eps : {1e-1, 1e-3, 1e-5}) {
    FlopCounter fc;
    const GradEstimate g =
        zo_estimate(*quad, std::vector<double>{3}, DenseDirection({1}), ZoConfig{eps}, fc);
    EXPECT_NEAR(g.jvps[0], 3.0, 1e-9);
    EXPECT_NEAR(g.g[0], 3.0, 1e-9);
  }
}

TEST(ZoEstimate, CubicTaylorRemainder) {
  const Cubic cubic;
  FlopCounter fc;
  const GradEstimate g =
      zo_estimate(cubic, std::vector<double>{1}, DenseDirection({1}), ZoConfig{0.1}, fc);
  EXPECT_NEAR(g.jvps[0], 3.01, 1e-12);
}

TEST(ZoEstimate, QuadraticDecayAgainstJvp) {
  const Model m = Model::parse("linear:3:6,tanh,linear:6:2");
  const ParamVector p = init_params(m, 1);
  const Batch b = random_batch(m, 4, 1);
  const SeededDirection v({77, 1.0, p.size()});
  FlopCounter fc;
  const double exact = jvp(m, p.data, b, LossSpec{}, v, fc).jvp;
  ModelObjective obj(m, b, LossSpec{});
  std::vector<double> err;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    err.push_back(std::abs(zo_estimate(obj, p.data, v, ZoConfig{eps}, fc).jvps[0] - exact));
  }
  EXPECT_NEAR(std::log10(err[0] / err[1]), 2.0, 0.2);
  EXPECT_NEAR(std::log10(err[1] / err[2]), 2.0, 0.2);
}

TEST(ZoEstimate, WeightsUntouchedAndSeedPathAgrees) {
  const Model m = Model::parse("linear:3:6,tanh,linear:6:2");
  const ParamVector p = init_params(m, 1);
  const Batch b = random_batch(m, 4, 1);
  const Perturbation pert{31, 1.0, p.size()};
  std::vector<double> w = p.data;
  FlopCounter fa;
  FlopCounter fb;
  const GradEstimate a = zo_estimate(m, w, b, LossSpec{}, pert, ZoConfig{}, fa);
  EXPECT_EQ(w, p.data);
  ModelObjective obj(m, b, LossSpec{});
  const GradEstimate c = zo_estimate(obj, w, SeededDirection(pert), ZoConfig{}, fb);
  EXPECT_EQ(a.g, c.g);
  EXPECT_EQ(fa.total(), fb.total());
}

TEST(ZoEstimate, CostIsTwoForwardsPlusPerturbationWork) {
  const Model m = Model::parse("linear:3:6,tanh,linear:6:2");
  const ParamVector p = init_params(m, 1);
  const Batch b = random_batch(m, 4, 1);
  FlopCounter ff;
  const double base = perturbed_loss(m, p.data, b, LossSpec{}, nullptr, 0.0, ff).loss;
  EXPECT_TRUE(std::isfinite(base));
  FlopCounter fz;
  zo_estimate(m, p.data, b, LossSpec{}, {3, 1.0, p.size()}, ZoConfig{}, fz);
  // Two perturbed forwards, 2d to form w +- eps*v, the scalar, d for s*v.
  EXPECT_EQ(fz.total(), 2 * ff.total() + 4 * p.size() + 3 + p.size());
}

TEST(ZoEstimate, OverflowNamesTheSide) {
  const Cubic cubic(1.05);
  FlopCounter fc;
  try {
    zo_estimate(cubic, std::vector<double>{1}, DenseDirection({1}), ZoConfig{0.1}, fc);
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_NE(std::string(e.what()).find("w + eps*v"), std::string::npos) << e.what();
  }
  try {
    zo_estimate(cubic, std::vector<double>{1}, DenseDirection({-1}), ZoConfig{0.1}, fc);
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_NE(std::string(e.what()).find("w - eps*v"), std::string::npos) << e.what();
  }
}

TEST(ZoConfig, RejectsNonPositiveEpsilon) {
  EXPECT_THROW(ZoConfig{0.0}.validate(), ConfigError);
  EXPECT_THROW(ZoConfig{-1e-3}.validate(), ConfigError);
  EXPECT_NO_THROW(ZoConfig{1e-3}.validate());
}

}  // namespace
}  // namespace gradbench
