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

#include "gradbench/errors.h"
#include "gradbench/random.h"
#include "gradbench/tensor.h"

namespace gradbench {
namespace {

TEST(Matmul, IdentityTimesMatrix) {
  FlopCounter fc;
  const Tensor c = matmul(Tensor::matrix(2, 2, {1, 0, 0, 1}),
                          Tensor::matrix(2, 2, {1, 2, 3, 4}), fc);
  EXPECT_EQ(c, Tensor::matrix(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(fc.total(), 16u);
}

TEST(Matmul, RowVectorCost) {
  FlopCounter fc;
  matmul(Tensor({1, 4}, 1.0), Tensor({4, 3}, 1.0), fc);
  EXPECT_EQ(fc.total(), 24u);
}

TEST(Matmul, MatchesTripleLoopBitForBit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Tensor a({3, 3});
    Tensor b({3, 3});
    fill_normal(seed, 0, a.data());
    fill_normal(seed, 9, b.data());
    FlopCounter fc;
    const Tensor c = matmul(a, b, fc);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < 3; ++k) acc += a.at(i, k) * b.at(k, j);
        EXPECT_EQ(c.at(i, j), acc);
      }
    }
  }
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  FlopCounter fc;
  try {
    matmul(Tensor({2, 3}), Tensor({4, 5}), fc);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(shape_string({2, 3})), std::string::npos) << what;
    EXPECT_NE(what.find(shape_string({4, 5})), std::string::npos) << what;
  }
}

TEST(Matmul, FlopsAre2mkn) {
  for (std::size_t m : {1, 3, 7}) {
    for (std::size_t k : {2, 5}) {
      for (std::size_t n : {1, 4}) {
        FlopCounter fc;
        matmul(Tensor({m, k}), Tensor({k, n}), fc);
        EXPECT_EQ(fc.total(), 2 * m * k * n);
      }
    }
  }
}

TEST(Elementwise, Examples) {
  FlopCounter fc;
  EXPECT_EQ(add(Tensor::vector({1, 2}), Tensor::vector({3, 4}), fc), Tensor::vector({4, 6}));
  EXPECT_EQ(scale(Tensor::vector({1, -2}), 0.0, fc), Tensor::vector({0, 0}));
  const Tensor a = Tensor::vector({0.3, -7, 2.5});
  EXPECT_EQ(sub(a, a, fc), Tensor::vector({0, 0, 0}));
  EXPECT_EQ(fc.total(), 7u);
}

TEST(Elementwise, ShapeMismatchThrows) {
  FlopCounter fc;
  EXPECT_THROW(add(Tensor::vector({1, 2}), Tensor::vector({1, 2, 3}), fc), ShapeError);
}

TEST(Reduce, Examples) {
  FlopCounter fc;
  EXPECT_EQ(reduce(Tensor::vector({1, 2, 3}), ReduceKind::kSum, fc), 6.0);
  EXPECT_EQ(reduce(Tensor::vector({4}), ReduceKind::kMean, fc), 4.0);
  EXPECT_EQ(reduce(Tensor::vector({-1, -5}), ReduceKind::kMax, fc), -1.0);
}

TEST(Reduce, EmptyThrows) {
  FlopCounter fc;
  EXPECT_THROW(reduce(Tensor(), ReduceKind::kSum, fc), ShapeError);
}

TEST(Reduce, RepeatedSumIsBitIdentical) {
  Tensor a({1000});
  fill_normal(5, 0, a.data());
  FlopCounter fc;
  const double first = reduce(a, ReduceKind::kSum, fc);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(reduce(a, ReduceKind::kSum, fc), first);
}

TEST(ActivationMeter, TracksPeak) {
  ActivationMeter m;
  m.hold(10);
  m.hold(5);
  m.release(10);
  m.hold(3);
  EXPECT_EQ(m.current(), 8u);
  EXPECT_EQ(m.peak(), 15u);
}

}  // namespace
}  // namespace gradbench
