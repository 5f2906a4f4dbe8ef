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
#include "gradbench/reverse_ad.h"
#include "gradbench/synthetic.h"

namespace gradbench {
namespace {

const Model kSquare = Model::parse("linear:1:1:nobias");
const Batch kUnit{Tensor::matrix(1, 1, {1}), Tensor::matrix(1, 1, {0})};

Batch random_batch(const Model& m, std::size_t rows, std::uint64_t seed) {
  Tensor x({rows, m.input_dim()});
  Tensor t({rows, m.output_dim()});
  fill_normal(derive_seed(seed, 1), 0, x.data());
  fill_normal(derive_seed(seed, 2), 0, t.data());
  return {std::move(x), std::move(t)};
}

TEST(Jvp, SquareDirectionalDerivative) {
  FlopCounter fc;
  const JvpResult r =
      jvp(kSquare, std::vector<double>{3}, kUnit, LossSpec{}, DenseDirection({1}), fc);
  EXPECT_EQ(r.jvp, 6.0);
  EXPECT_EQ(r.loss, 9.0);
}

TEST(Jvp, MatchesBackpropOnRandomMlps) {
  const char* specs[] = {"linear:3:5,tanh,linear:5:2", "linear:4:8,relu,linear:8:8,softplus,linear:8:3"};
  for (const char* spec : specs) {
    const Model m = Model::parse(spec);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ParamVector p = init_params(m, seed);
      const Batch b = random_batch(m, 4, seed);
      std::vector<double> v(p.size());
      fill_normal(derive_seed(seed, 9), 0, v);
      FlopCounter fc;
      const auto g = backward_vanilla(m, p.data, b, LossSpec{}, fc);
      const double expected = dot(g.g, v);
      const double got = jvp(m, p.data, b, LossSpec{}, DenseDirection(v), fc).jvp;
      EXPECT_LT(std::abs(got - expected) / std::abs(expected), 1e-10);
    }
  }
}

TEST(Jvp, OrthogonalDirectionGivesZero) {
  const Model m = Model::parse("linear:3:4,tanh,linear:4:2");
  const ParamVector p = init_params(m, 4);
  const Batch b = random_batch(m, 3, 4);
  FlopCounter fc;
  const auto g = backward_vanilla(m, p.data, b, LossSpec{}, fc).g;
  std::vector<double> v(g.size());
  fill_normal(77, 0, v);
  const double proj = dot(v, g) / norm_sq(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * g[i];
  EXPECT_NEAR(jvp(m, p.data, b, LossSpec{}, DenseDirection(v), fc).jvp, 0.0, 1e-10);
}

TEST(Jvp, CrossEntropyMatchesBackprop) {
  const Model m = Model::parse("linear:5:6,tanh,linear:6:3");
  const ParamVector p = init_params(m, 1);
  Tensor x({4, 5});
  fill_normal(3, 0, x.data());
  const Batch b{x, Tensor::vector({0, 2, 1, 1})};
  const LossSpec ce{LossKind::kCrossEntropy};
  std::vector<double> v(p.size());
  fill_normal(5, 0, v);
  FlopCounter fc;
  const double expected = dot(backward_vanilla(m, p.data, b, ce, fc).g, v);
  EXPECT_NEAR(jvp(m, p.data, b, ce, DenseDirection(v), fc).jvp, expected,
              1e-10 * std::abs(expected));
}

TEST(Jvp, DualPeakIsTwiceWidestActivation) {
  const Model m = Model::parse("linear:3:9,tanh,linear:9:4");
  const ParamVector p = init_params(m, 0);
  FlopCounter fc;
  const auto r = jvp(m, p.data, random_batch(m, 2, 0), LossSpec{},
                     SeededDirection({1, 1.0, p.size()}), fc);
  EXPECT_EQ(r.peak_activation_units, 2u * 2 * 9);
}

TEST(Jvp, LinearInDirection) {
  const Model m = Model::parse("linear:3:4,tanh,linear:4:2");
  const ParamVector p = init_params(m, 6);
  const Batch b = random_batch(m, 3, 6);
  std::vector<double> v(p.size());
  fill_normal(8, 0, v);
  FlopCounter fc;
  const double one = jvp(m, p.data, b, LossSpec{}, DenseDirection(v), fc).jvp;
  for (double& x : v) x *= -4.0;
  EXPECT_EQ(jvp(m, p.data, b, LossSpec{}, DenseDirection(v), fc).jvp, -4.0 * one);
}

TEST(Jvp, Errors) {
  FlopCounter fc;
  EXPECT_THROW(jvp(kSquare, std::vector<double>{3}, kUnit, LossSpec{}, DenseDirection({1, 2}), fc),
               ShapeError);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(jvp(kSquare, std::vector<double>{1}, kUnit, LossSpec{}, DenseDirection({inf}), fc),
               OverflowError);
}

TEST(FmadEstimate, SquareWithScaledDirection) {
  ModelObjective obj(kSquare, kUnit, LossSpec{});
  FlopCounter fc;
  const GradEstimate g = fmad_estimate(obj, std::vector<double>{3}, DenseDirection({2}), fc);
  EXPECT_EQ(g.jvps, std::vector<double>{12.0});
  EXPECT_EQ(g.g, std::vector<double>{24.0});
}

TEST(FmadEstimate, AlignedDirectionRecoversGradient) {
  const Model m = Model::parse("linear:3:4,tanh,linear:4:2");
  const ParamVector p = init_params(m, 2);
  ModelObjective obj(m, random_batch(m, 3, 2), LossSpec{});
  const std::vector<double> grad = obj.grad(p.data);
  std::vector<double> v = grad;
  const double norm = std::sqrt(norm_sq(grad));
  for (double& x : v) x /= norm;
  FlopCounter fc;
  const GradEstimate g = fmad_estimate(obj, p.data, DenseDirection(v), fc);
  for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_NEAR(g.g[i], grad[i], 1e-12);
}

TEST(FmadEstimate, FlopsAreJvpPlusScaling) {
  const Model m = Model::parse("linear:3:4,tanh,linear:4:2");
  const ParamVector p = init_params(m, 2);
  const Batch b = random_batch(m, 3, 2);
  ModelObjective obj(m, b, LossSpec{});
  const SeededDirection v({5, 1.0, p.size()});
  FlopCounter fj;
  FlopCounter fe;
  jvp(m, p.data, b, LossSpec{}, v, fj);
  const GradEstimate g = fmad_estimate(obj, p.data, v, fe);
  EXPECT_EQ(fe.total(), fj.total() + p.size());
  EXPECT_EQ(g.flops, fe.total());
}

TEST(ForwardGradient, MonteCarloMeanIsUnbiased) {
  const std::vector<double> grad = {1.0, 1.0};
  const auto lin = make_linear(grad);
  const std::vector<double> w = {0.4, -0.2};
  std::vector<double> mean(2, 0.0);
  const std::size_t trials = 100000;
  for (std::uint64_t i = 0; i < trials; ++i) {
    FlopCounter fc;
    const auto g = fmad_estimate(*lin, w, SeededDirection({derive_seed(3, i), 1.0, 2}), fc);
    for (std::size_t k = 0; k < 2; ++k) mean[k] += g.g[k];
  }
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_LT(std::abs(mean[k] / trials - grad[k]) / grad[k], 0.01) << k;
  }
}

TEST(ForwardGradient, ModelOverloadUsesSeededDirection) {
  const Model m = Model::parse("linear:2:3,tanh,linear:3:1");
  const ParamVector p = init_params(m, 0);
  const Batch b = random_batch(m, 2, 0);
  const Perturbation pert{42, 1.0, p.size()};
  FlopCounter fc;
  const GradEstimate g = forward_gradient(m, p.data, b, LossSpec{}, pert, fc);
  const std::vector<double> v = regenerate(pert);
  ASSERT_EQ(g.jvps.size(), 1u);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(g.g[i], g.jvps[0] * v[i]);
}

}  // namespace
}  // namespace gradbench
