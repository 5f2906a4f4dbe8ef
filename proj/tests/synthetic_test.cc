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

#include <algorithm>
#include <cmath>
#include <set>

#include "gradbench/random.h"
#include "gradbench/reverse_ad.h"
#include "gradbench/synthetic.h"

namespace gradbench {
namespace {

TEST(Quadratic, ValueGradientJvp) {
  SeparableQuadratic q({1.0, 4.0}, {0.5, -1.0});
  const std::vector<double> w = {2.0, 1.0};
  EXPECT_DOUBLE_EQ(q.value(w), 0.5 * 4 + 0.5 * 4 + 1.0 - 1.0);
  EXPECT_EQ(q.grad(w), (std::vector<double>{2.5, 3.0}));
  FlopCounter fc;
  EXPECT_DOUBLE_EQ(q.jvp(w, DenseDirection({1, 2}), fc).jvp, 8.5);
  EXPECT_EQ(q.smoothness(), 4.0);
}

TEST(Quadratic, Factories) {
  EXPECT_EQ(make_quadratic(5, 2.0)->lambdas(), std::vector<double>(5, 2.0));
  const auto ill = make_ill_conditioned(6, 1.0, 1000.0);
  EXPECT_DOUBLE_EQ(*std::max_element(ill->lambdas().begin(), ill->lambdas().end()), 1.0);
  EXPECT_NEAR(*std::min_element(ill->lambdas().begin(), ill->lambdas().end()), 1e-3, 1e-15);
  const auto lin = make_linear({1, 0, 0});
  EXPECT_EQ(lin->grad(std::vector<double>{4, 5, 6}), (std::vector<double>{1, 0, 0}));
}

TEST(SyntheticProblem, InitialPointDeterministic) {
  SyntheticProblem p(make_quadratic(8, 1.0), 2.0);
  EXPECT_EQ(p.initial_point(3), p.initial_point(3));
  EXPECT_NE(p.initial_point(3), p.initial_point(4));
}

TEST(Blobs, ShapesLabelsAndDeterminism) {
  const Batch b = make_blobs(40, 6, 4, 1.0, 7);
  EXPECT_EQ(b.x.shape(), (std::vector<std::size_t>{40, 6}));
  EXPECT_EQ(b.target.size(), 40u);
  std::set<double> labels(b.target.data().begin(), b.target.data().end());
  EXPECT_EQ(labels, (std::set<double>{0, 1, 2, 3}));
  EXPECT_EQ(make_blobs(40, 6, 4, 1.0, 7).x, b.x);
}

TEST(Regression, TargetsFollowTeacherModel) {
  const Model m = Model::parse("linear:3:4,tanh,linear:4:1");
  const Batch b = make_regression(m, 50, 0.0, 9);
  EXPECT_EQ(b.target.shape(), (std::vector<std::size_t>{50, 1}));
  EXPECT_EQ(make_regression(m, 50, 0.0, 9).target, b.target);
}

TEST(SoftmaxSmoothness, BoundsTheHessianAlongRandomDirections) {
  const Batch data = make_blobs(64, 5, 3, 1.0, 2);
  const double L = softmax_linear_smoothness(data.x);
  const Model m = Model::parse("linear:5:3");
  const ParamVector p = init_params(m, 1);
  const LossSpec ce{LossKind::kCrossEntropy};
  FlopCounter fc;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::vector<double> v(p.size());
    fill_normal(s, 0, v);
    const double n = std::sqrt(norm_sq(v));
    for (double& x : v) x /= n;
    std::vector<double> wp = p.data;
    std::vector<double> wm = p.data;
    for (std::size_t i = 0; i < v.size(); ++i) {
      wp[i] += 1e-4 * v[i];
      wm[i] -= 1e-4 * v[i];
    }
    const auto gp = backward_vanilla(m, wp, data, ce, fc).g;
    const auto gm = backward_vanilla(m, wm, data, ce, fc).g;
    double curvature = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) curvature += v[i] * (gp[i] - gm[i]) / 2e-4;
    EXPECT_LE(curvature, L * (1 + 1e-6));
  }
}

}  // namespace
}  // namespace gradbench
