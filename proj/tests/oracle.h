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

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the model description.

#ifndef GRADBENCH_TESTS_ORACLE_H_
#define GRADBENCH_TESTS_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gradbench/nn.h"

namespace gradbench::oracle {

using Matrix = std::vector<std::vector<long double>>;

inline long double activate(ActivationKind kind, long double x) {
  switch (kind) {
    case ActivationKind::kTanh:
      return std::tanh(x);
    case ActivationKind::kRelu:
      return x > 0 ? x : 0;
    case ActivationKind::kSoftplus:
      return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return x;
}

// Row-major weight (in x out) followed by bias, layer by layer.
template <typename W>
Matrix forward(const Model& model, std::span<const W> w, const Tensor& x) {
  Matrix h(x.rows(), std::vector<long double>(x.cols()));
  for (std::size_t b = 0; b < x.rows(); ++b) {
    for (std::size_t j = 0; j < x.cols(); ++j) h[b][j] = x.at(b, j);
  }
  std::size_t offset = 0;
  for (const LayerSpec& spec : model.layers()) {
    if (spec.kind == LayerKind::kActivation) {
      for (auto& row : h) {
        for (auto& v : row) v = activate(spec.activation, v);
      }
      continue;
    }
    Matrix next(h.size(), std::vector<long double>(spec.out_dim, 0.0L));
    for (std::size_t b = 0; b < h.size(); ++b) {
      for (std::size_t o = 0; o < spec.out_dim; ++o) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < spec.in_dim; ++i) {
          acc += h[b][i] * static_cast<long double>(w[offset + i * spec.out_dim + o]);
        }
        if (spec.bias) acc += w[offset + spec.in_dim * spec.out_dim + o];
        next[b][o] = acc;
      }
    }
    offset += spec.num_params();
    h = std::move(next);
  }
  return h;
}

// Mean over all output elements of the squared error.
inline long double mse(const Matrix& y, const Tensor& target) {
  long double acc = 0.0L;
  std::size_t count = 0;
  for (std::size_t b = 0; b < y.size(); ++b) {
    for (std::size_t j = 0; j < y[b].size(); ++j) {
      const long double diff = y[b][j] - target.at(b, j);
      acc += diff * diff;
      ++count;
    }
  }
  return acc / static_cast<long double>(count);
}

// Mean over the batch of -log softmax(y)[label].
inline long double cross_entropy(const Matrix& y, const Tensor& labels) {
  long double acc = 0.0L;
  for (std::size_t b = 0; b < y.size(); ++b) {
    const long double mx = *std::max_element(y[b].begin(), y[b].end());
    long double z = 0.0L;
    for (long double v : y[b]) z += std::exp(v - mx);
    acc += mx + std::log(z) - y[b][static_cast<std::size_t>(labels[b])];
  }
  return acc / static_cast<long double>(y.size());
}

inline long double loss(const Model& model, std::span<const long double> w,
                        const Batch& batch, LossKind kind) {
  const Matrix y = forward(model, w, batch.x);
  return kind == LossKind::kMse ? mse(y, batch.target) : cross_entropy(y, batch.target);
}

// Coordinate-wise central difference in extended precision.
inline std::vector<double> fd_gradient(const Model& model, std::span<const double> w,
                                       const Batch& batch, LossKind kind,
                                       long double eps = 1e-5L) {
  std::vector<long double> wl(w.begin(), w.end());
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const long double keep = wl[i];
    wl[i] = keep + eps;
    const long double fp = loss(model, std::span<const long double>(wl), batch, kind);
    wl[i] = keep - eps;
    const long double fm = loss(model, std::span<const long double>(wl), batch, kind);
    wl[i] = keep;
    g[i] = static_cast<double>((fp - fm) / (2.0L * eps));
  }
  return g;
}

inline double max_rel_error(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double den = std::max(std::abs(a[i]), std::abs(b[i]));
    if (den > 0.0) worst = std::max(worst, std::abs(a[i] - b[i]) / den);
  }
  return worst;
}

}  // namespace gradbench::oracle

#endif  // GRADBENCH_TESTS_ORACLE_H_
