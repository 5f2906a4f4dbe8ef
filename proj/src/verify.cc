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

#include "gradbench/verify.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <utility>

#include "gradbench/analysis.h"
#include "gradbench/errors.h"
#include "gradbench/forward_ad.h"
#include "gradbench/model_objective.h"
#include "gradbench/nn.h"
#include "gradbench/optim.h"
#include "gradbench/random.h"
#include "gradbench/reverse_ad.h"
#include "gradbench/synthetic.h"
#include "gradbench/variants.h"
#include "gradbench/zero_order.h"
#include "json.hpp"

namespace gradbench {
namespace {

constexpr const char* kBenchmarkModel =
    "linear:32:64,tanh,linear:64:64,tanh,linear:64:64,tanh,linear:64:10";

class Report {
 public:
  Report(std::string suite, double scale, std::vector<VerifyEntry>& out)
      : suite_(std::move(suite)), scale_(scale), out_(out) {}

  // |measured - predicted| <= tol, tolerance fixed.
  void exact(const std::string& property, double measured, double predicted,
             double tol = 0.0) {
    add(property, measured, predicted, tol, std::abs(measured - predicted) <= tol);
  }
  // Stochastic: |measured - predicted| <= tol * scale.
  void stochastic(const std::string& property, double measured, double predicted,
                  double tol) {
    const double t = tol * scale_;
    add(property, measured, predicted, t, std::abs(measured - predicted) <= t);
  }
  // Stochastic relative: |measured - predicted| <= rel * scale * |predicted|.
  void relative(const std::string& property, double measured, double predicted,
                double rel) {
    const double t = rel * scale_ * std::abs(predicted);
    add(property, measured, predicted, t, std::abs(measured - predicted) <= t);
  }
  // measured <= bound.
  void at_most(const std::string& property, double measured, double bound) {
    add(property, measured, bound, 0.0, measured <= bound);
  }
  void holds(const std::string& property, bool ok) {
    add(property, ok ? 1.0 : 0.0, 1.0, 0.0, ok);
  }

 private:
  void add(const std::string& property, double measured, double predicted, double tol,
           bool pass) {
    out_.push_back({suite_, property, measured, predicted, tol, pass});
  }

  std::string suite_;
  double scale_;
  std::vector<VerifyEntry>& out_;
};

Model chain(std::size_t depth, std::size_t width) {
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < depth; ++i) {
    layers.push_back(i % 2 == 0 ? LayerSpec::linear(width, width)
                                : LayerSpec::act(ActivationKind::kTanh));
  }
  return Model(std::move(layers));
}

Model small_mlp(std::size_t in, std::size_t hidden, std::size_t out) {
  return Model({LayerSpec::linear(in, hidden), LayerSpec::act(ActivationKind::kTanh),
                LayerSpec::linear(hidden, hidden), LayerSpec::act(ActivationKind::kTanh),
                LayerSpec::linear(hidden, out)});
}

Batch random_batch(const Model& m, std::size_t rows, std::uint64_t seed) {
  Tensor x({rows, m.input_dim()});
  Tensor t({rows, m.output_dim()});
  fill_normal(derive_seed(seed, 1), 0, x.data());
  fill_normal(derive_seed(seed, 2), 0, t.data());
  return {std::move(x), std::move(t)};
}

double rel_err(double a, double b) {
  const double den = std::max(std::abs(a), std::abs(b));
  return den == 0.0 ? 0.0 : std::abs(a - b) / den;
}

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> unit_e1(std::size_t d) {
  std::vector<double> g(d, 0.0);
  g[0] = 1.0;
  return g;
}

void accounting_suite(Report& r, std::uint64_t seed) {
  // tensor
  {
    std::size_t mismatches = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
      const std::size_t m = 1 + static_cast<std::size_t>(uniform_at(seed, 3 * i) * 9);
      const std::size_t k = 1 + static_cast<std::size_t>(uniform_at(seed, 3 * i + 1) * 9);
      const std::size_t n = 1 + static_cast<std::size_t>(uniform_at(seed, 3 * i + 2) * 9);
      FlopCounter fc;
      matmul(Tensor({m, k}, 1.0), Tensor({k, n}, 1.0), fc);
      if (fc.total() != 2 * m * k * n) ++mismatches;
    }
    r.exact("tensor.matmul_flops_exact_mismatches", static_cast<double>(mismatches), 0);
    Tensor a({7, 5});
    Tensor b({5, 3});
    fill_normal(seed, 0, a.data());
    fill_normal(seed, 100, b.data());
    FlopCounter fc;
    r.holds("tensor.matmul_deterministic", matmul(a, b, fc) == matmul(a, b, fc));
    const double s1 = reduce(a, ReduceKind::kSum, fc);
    const double s2 = reduce(a, ReduceKind::kSum, fc);
    r.holds("tensor.reduction_bit_identical",
            std::bit_cast<std::uint64_t>(s1) == std::bit_cast<std::uint64_t>(s2));
  }
  // nn
  {
    const Model m = chain(16, 8);
    const ParamVector p = init_params(m, seed);
    FlopCounter fc;
    const ForwardResult fr = forward(m, p.data, Tensor({1, 8}, 0.5), fc);
    r.exact("nn.activation_units_equal_cD", static_cast<double>(fr.activation_units),
            16.0 * 8.0);
    double min_loss = 1e300;
    for (std::uint64_t i = 0; i < 20; ++i) {
      Tensor y({4, 3});
      Tensor t({4, 3});
      fill_normal(derive_seed(seed, 7, i), 0, y.data());
      fill_normal(derive_seed(seed, 8, i), 0, t.data());
      min_loss = std::min(min_loss, loss(LossSpec{LossKind::kMse}, y, t, fc));
      Tensor labels({4});
      for (std::size_t k = 0; k < 4; ++k) labels[k] = static_cast<double>((i + k) % 3);
      min_loss = std::min(min_loss, loss(LossSpec{LossKind::kCrossEntropy}, y, labels, fc));
    }
    r.holds("nn.loss_nonnegative", min_loss >= 0.0);
  }
  // reverse_ad
  {
    double worst_fd = 0.0;
    double worst_ckpt = 0.0;
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      const Model m = small_mlp(3, 6, 2);
      const ParamVector p = init_params(m, derive_seed(seed, 20, trial));
      const Batch b = random_batch(m, 4, derive_seed(seed, 21, trial));
      FlopCounter fc;
      const GradEstimate g = backward_vanilla(m, p.data, b, LossSpec{}, fc);
      const GradEstimate c = backward_checkpointed(
          m, p.data, b, LossSpec{}, CheckpointPlan::for_depth(m.depth()), fc);
      for (std::size_t i = 0; i < p.size(); ++i) {
        std::vector<double> wp = p.data;
        std::vector<double> wm = p.data;
        wp[i] += 1e-5;
        wm[i] -= 1e-5;
        const double fp = perturbed_loss(m, wp, b, LossSpec{}, nullptr, 0, fc).loss;
        const double fm = perturbed_loss(m, wm, b, LossSpec{}, nullptr, 0, fc).loss;
        // Tiny coordinates are judged against the loss scale.
        const double fd = (fp - fm) / 2e-5;
        worst_fd = std::max(worst_fd, std::abs(fd - g.g[i]) /
                                          std::max({std::abs(fd), std::abs(g.g[i]), 1e-3}));
        worst_ckpt = std::max(worst_ckpt, rel_err(g.g[i], c.g[i]));
      }
    }
    r.at_most("reverse_ad.finite_difference_rel_error", worst_fd, 1e-6);
    r.at_most("reverse_ad.checkpoint_vs_vanilla_rel_error", worst_ckpt, 1e-12);
    for (std::size_t D : {16, 64, 256}) {
      const Model m = chain(D, 8);
      const ParamVector p = init_params(m, seed);
      const Batch b{Tensor({1, 8}, 0.25), Tensor({1, 8}, 0.0)};
      const CheckpointPlan plan = CheckpointPlan::for_depth(D);
      FlopCounter fc;
      const auto v = backward_vanilla(m, p.data, b, LossSpec{}, fc);
      const auto c = backward_checkpointed(m, p.data, b, LossSpec{}, plan, fc);
      const double s = static_cast<double>(plan.segment_size);
      const double K = std::ceil(static_cast<double>(D) / s);
      r.exact("reverse_ad.vanilla_peak_cD_" + std::to_string(D),
              static_cast<double>(v.peak_activation_units), 8.0 * static_cast<double>(D));
      r.exact("reverse_ad.checkpoint_peak_model_" + std::to_string(D),
              static_cast<double>(c.peak_activation_units), (K + s) * 8.0);
    }
  }
  // forward_ad
  {
    double worst = 0.0;
    std::size_t linearity_mismatch = 0;
    bool peak_ok = true;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const Model m = small_mlp(4, 5 + trial % 4, 3);
      const ParamVector p = init_params(m, derive_seed(seed, 30, trial));
      const Batch b = random_batch(m, 3, derive_seed(seed, 31, trial));
      FlopCounter fc;
      const GradEstimate g = backward_vanilla(m, p.data, b, LossSpec{}, fc);
      std::vector<double> v(p.size());
      fill_normal(derive_seed(seed, 32, trial), 0, v);
      const JvpResult j = jvp(m, p.data, b, LossSpec{}, DenseDirection(v), fc);
      worst = std::max(worst, rel_err(j.jvp, dot(g.g, v)));
      std::vector<double> v2 = v;
      for (double& x : v2) x *= 2.0;
      const JvpResult j2 = jvp(m, p.data, b, LossSpec{}, DenseDirection(v2), fc);
      if (j2.jvp != 2.0 * j.jvp) ++linearity_mismatch;
      std::size_t ch = 0;
      for (std::size_t i = 0; i < m.depth(); ++i) ch = std::max(ch, 3 * m.width(i));
      peak_ok = peak_ok && j.peak_activation_units == 2 * ch;
    }
    r.at_most("forward_ad.jvp_vs_bp_rel_error", worst, 1e-10);
    r.exact("forward_ad.linearity_mismatches", static_cast<double>(linearity_mismatch), 0);
    r.holds("forward_ad.dual_peak_two_ch", peak_ok);
  }
  // zero_order
  {
    const Model m = small_mlp(3, 6, 2);
    const ParamVector p = init_params(m, seed);
    const Batch b = random_batch(m, 4, seed);
    std::vector<double> w = p.data;
    FlopCounter fc;
    zo_estimate(m, w, b, LossSpec{}, Perturbation{seed, 1.0, w.size()}, ZoConfig{}, fc);
    r.holds("zero_order.weights_bit_identical", w == p.data);

    const SeededDirection v(Perturbation{derive_seed(seed, 40), 1.0, w.size()});
    const double exact_jvp = jvp(m, w, b, LossSpec{}, v, fc).jvp;
    ModelObjective obj(m, b, LossSpec{});
    std::vector<double> xs;
    std::vector<double> ys;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const double s = zo_estimate(obj, w, v, ZoConfig{eps}, fc).jvps.front();
      xs.push_back(std::log10(eps));
      ys.push_back(std::log10(std::abs(s - exact_jvp)));
    }
    r.exact("zero_order.discretization_slope", slope(xs, ys), 2.0, 0.2);

    const auto quad = make_quadratic(4, 1.0);
    const std::vector<double> wq = {0.1, -0.05, 0.07, 0.02};
    double worst = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const SeededDirection vq(Perturbation{derive_seed(seed, 41), 1.0, 4});
      const double s = zo_estimate(*quad, wq, vq, ZoConfig{eps}, fc).jvps.front();
      worst = std::max(worst, std::abs(s - dot(wq, vq.materialize())));
    }
    r.at_most("zero_order.quadratic_exactness", worst, 1e-12);
    r.holds("zero_order.regenerate_deterministic",
            regenerate({seed, 1.0, 16}) == regenerate({seed, 1.0, 16}));
  }
  // variants
  {
    const Model m = Model::parse(kBenchmarkModel);
    const ParamVector p = init_params(m, seed);
    ModelObjective obj(m, random_batch(m, 64, seed), LossSpec{});
    for (BaseEstimator base : {BaseEstimator::kFmad, BaseEstimator::kZo}) {
      const std::string tag = base == BaseEstimator::kFmad ? "fmad" : "zo";
      EstimatorConfig seq;
      seq.base = base;
      EstimatorConfig par = seq;
      par.mode = ExecutionMode::kParallel;
      for (std::size_t n : {2, 10}) {
        std::vector<Perturbation> ps;
        for (std::size_t i = 0; i < n; ++i) {
          ps.push_back({derive_seed(seed, 50, i), 1.0, p.size()});
        }
        FlopCounter fs;
        FlopCounter fp;
        const GradEstimate a = estimate_multiple(obj, p.data, seq, ps, fs);
        const GradEstimate b = estimate_multiple(obj, p.data, par, ps, fp);
        const std::string sfx = tag + "_n" + std::to_string(n);
        r.holds("variants.mode_bit_identical_" + sfx, a.g == b.g);
        r.exact("variants.parallel_peak_n_times_" + sfx,
                static_cast<double>(b.peak_activation_units),
                static_cast<double>(n * a.peak_activation_units));
        FlopCounter f1;
        const GradEstimate one = estimate_multiple(obj, p.data, seq, std::span(ps).first(1), f1);
        r.exact("variants.sequential_peak_equals_vanilla_" + sfx,
                static_cast<double>(a.peak_activation_units),
                static_cast<double>(one.peak_activation_units));
        const double predicted = static_cast<double>(n) * static_cast<double>(f1.total());
        r.exact("variants.multiple_flops_n_times_" + sfx, static_cast<double>(fs.total()),
                predicted, 0.01 * predicted);
      }
    }
    const std::vector<std::size_t> mask = sparse_mask(p.data, 0.01);
    std::vector<double> w = p.data;
    Optimizer opt(OptimizerConfig{}, w.size());
    EstimatorConfig cfg;
    const Perturbation pert{seed, 1.0, w.size()};
    FlopCounter fc;
    const GradEstimate g = estimate_multiple(obj, w, cfg, std::span(&pert, 1), fc, &mask);
    opt.step(w, g.g, mask);
    std::size_t touched = 0;
    for (std::size_t i = 0; i < w.size(); ++i) touched += w[i] != p.data[i];
    bool outside_untouched = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::binary_search(mask.begin(), mask.end(), i)) {
        outside_untouched = outside_untouched && w[i] == p.data[i];
      }
    }
    r.holds("variants.sparse_unmasked_untouched", outside_untouched);
    r.at_most("variants.sparse_touched_count", static_cast<double>(touched),
              std::ceil(0.01 * static_cast<double>(w.size())));

    SyntheticProblem prob(make_quadratic(6, 1.0));
    const std::vector<double> w0 = prob.initial_point(seed);
    SvrgState state = svrg_refresh(prob, w0, cfg, seed, fc);
    const GradEstimate sv = svrg_estimate(prob.full(), w0, state,
                                          SeededDirection({seed + 1, 1.0, 6}), cfg, fc);
    r.holds("variants.svrg_at_snapshot_returns_mu", sv.g == state.mu);

    Accumulator acc(100, 3);
    const std::vector<double> unit = {1.0, 2.0, 3.0};
    for (int t = 0; t < 1234; ++t) acc.push(unit);
    r.exact("variants.accumulate_updates", static_cast<double>(acc.emitted()), 12.0);
  }
  // optim
  {
    OptimizerConfig cfg;
    cfg.kind = OptimizerKind::kAdamw;
    cfg.eta = 0.1;
    Optimizer a(cfg, 3);
    Optimizer b(cfg, 3);
    std::vector<double> wa = {1, 2, 3};
    std::vector<double> wb = wa;
    const std::vector<double> g = {0.5, -1, 2};
    a.step(wa, g);
    b.step(wb, g);
    r.holds("optim.step_deterministic", wa == wb);
    bool monotone = true;
    for (std::size_t d = 1; d < 200; ++d) {
      monotone = monotone && max_stable_eta(1.0, d + 1, 4) < max_stable_eta(1.0, d, 4);
      monotone = monotone && max_stable_eta(1.0, 50, d + 1) > max_stable_eta(1.0, 50, d);
    }
    r.holds("optim.max_stable_eta_monotone", monotone);
  }
}

void lemma_suite(Report& r, std::uint64_t seed) {
  {
    std::vector<double> v(1000000);
    fill_normal(seed, 0, v);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    r.stochastic("zero_order.generator_mean", mean, 0.0, 0.01);
    r.stochastic("zero_order.generator_variance", var, 1.0, 0.01);
  }
  for (std::size_t d : {3, 10}) {
    const std::vector<double> g = unit_e1(d);
    const auto lin = make_linear(g);
    const std::vector<double> w(d, 0.0);
    const std::string sd = "_d" + std::to_string(d);
    for (int which = 0; which < 2; ++which) {
      const EstimatorFn est = which == 0 ? fmad_estimator() : zo_estimator(1e-4);
      const std::string tag = which == 0 ? "forward_ad" : "zero_order";
      const UnbiasednessReport u =
          verify_unbiasedness(est, *lin, w, g, 100000, derive_seed(seed, 60, d, which));
      double worst = 0.0;
      for (std::size_t k = 0; k < d; ++k) worst = std::max(worst, u.deviation[k] / u.std_error[k]);
      r.stochastic(tag + ".unbiased_max_se" + sd, worst, 0.0, 3.0);
      const std::vector<std::size_t> ns = {1, 4, 16};
      const VarianceReport vr =
          verify_variance(est, *lin, w, g, ns, 100000, derive_seed(seed, 61, d, which));
      for (const VarianceEntry& e : vr.entries) {
        r.relative(tag + ".variance" + sd + "_n" + std::to_string(e.n), e.measured,
                   e.predicted, 0.10);
      }
    }
    const double m2 = measure_second_moment(fmad_estimator(), *lin, w, 1000000,
                                            derive_seed(seed, 62, d));
    r.relative("forward_ad.second_moment" + sd, m2, static_cast<double>(d + 2), 0.05);
  }
  {
    // ZO variance excess over FmAD under shared directions shrinks with eps.
    const Model m = small_mlp(3, 5, 2);
    const ParamVector p = init_params(m, seed);
    ModelObjective obj(m, random_batch(m, 4, seed), LossSpec{});
    auto excess = [&](double eps) {
      double acc = 0.0;
      for (std::uint64_t i = 0; i < 2000; ++i) {
        FlopCounter fc;
        const SeededDirection v({derive_seed(seed, 63, i), 1.0, p.size()});
        acc += norm_sq(zo_estimate(obj, p.data, v, ZoConfig{eps}, fc).g) -
               norm_sq(fmad_estimate(obj, p.data, v, fc).g);
      }
      return std::abs(acc / 2000.0);
    };
    const double big = excess(1e-2);
    const double small = excess(1e-4);
    r.relative("zero_order.excess_ratio_eps2", small / big, 1e-4, 0.5);
  }
  {
    const auto lin = make_linear({1.0, 0.0, 0.0});
    const std::vector<double> w(3, 0.0);
    const std::vector<double> g = {1.0, 0.0, 0.0};
    const std::vector<std::size_t> ns = {1, 16};
    const VarianceReport vr =
        verify_variance(fmad_estimator(), *lin, w, g, ns, 10000, derive_seed(seed, 64));
    r.relative("variants.multiple_variance_over_16", vr.entries[1].measured,
               vr.entries[0].measured / 16.0, 0.15);
  }
  {
    // SVRG lowers variance near the snapshot.
    SyntheticProblem prob(make_quadratic(5, 1.0));
    const std::vector<double> snap = prob.initial_point(seed);
    std::vector<double> near = snap;
    for (double& x : near) x += 0.01;
    EstimatorConfig cfg;
    FlopCounter fc;
    SvrgState state = svrg_refresh(prob, snap, cfg, seed, fc);
    const std::vector<double> g = prob.full().grad(near);
    double var_svrg = 0.0;
    double var_plain = 0.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      state.age = 0;
      const SeededDirection v({derive_seed(seed, 65, i), 1.0, 5});
      const GradEstimate s = svrg_estimate(prob.full(), near, state, v, cfg, fc);
      const GradEstimate b = fmad_estimate(prob.full(), near, v, fc);
      for (std::size_t k = 0; k < 5; ++k) {
        var_svrg += (s.g[k] - state.mu[k] - (g[k] - snap[k])) *
                    (s.g[k] - state.mu[k] - (g[k] - snap[k]));
        var_plain += (b.g[k] - g[k]) * (b.g[k] - g[k]);
      }
    }
    r.at_most("variants.svrg_variance_below_plain", var_svrg, var_plain);
    // Variance of mu halves when svrg_full_n doubles.
    auto mu_var = [&](std::size_t full_n) {
      EstimatorConfig c;
      c.svrg_full_n = full_n;
      double acc = 0.0;
      const std::vector<double> gs = prob.full().grad(snap);
      for (std::uint64_t i = 0; i < 4000; ++i) {
        FlopCounter f;
        const SvrgState s = svrg_refresh(prob, snap, c, derive_seed(seed, 66, full_n, i), f);
        for (std::size_t k = 0; k < 5; ++k) acc += (s.mu[k] - gs[k]) * (s.mu[k] - gs[k]);
      }
      return acc / 4000.0;
    };
    r.relative("variants.svrg_mu_variance_halves", mu_var(2) / mu_var(1), 0.5, 0.15);
  }
}

bool decreasing_trend(const std::vector<RunRecord>& records) {
  const std::size_t k = std::max<std::size_t>(1, records.size() / 10);
  double head = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    head += records[i].grad_norm_sq;
    tail += records[records.size() - 1 - i].grad_norm_sq;
  }
  return tail < head;
}

void theorem_suite(Report& r, std::uint64_t seed) {
  EstimatorConfig est;
  OptimizerConfig opt;
  {
    SyntheticProblem prob(make_quadratic(10, 1.0));
    opt.eta = 1.0;
    std::vector<std::vector<RunRecord>> runs;
    for (std::uint64_t s = 0; s < 5; ++s) {
      runs.push_back(convergence_experiment(prob, Method{Family::kBp, Variant::kVanilla},
                                            opt, est, 100, seed + s)
                         .records);
    }
    BoundInputs in;
    in.eta = 1.0;
    in.d = 10;
    const BoundCheck c = check_bound(runs, ensemble_bound(Family::kBp, runs, in));
    r.at_most("analysis.bp_bound", c.measured, c.rhs);
    const RunResult one = convergence_experiment(
        prob, Method{Family::kBp, Variant::kVanilla}, opt, est, 1, seed);
    r.exact("analysis.bp_jump_to_minimum", norm_sq(one.final_w), 0.0);
  }
  SyntheticProblem quad(make_quadratic(100, 1.0));
  for (Family f : {Family::kFmad, Family::kZo}) {
    const std::string tag = f == Family::kFmad ? "fmad" : "zo";
    const Method m{f, Variant::kVanilla};
    std::vector<std::vector<RunRecord>> runs;
    int converged = 0;
    int diverged = 0;
    opt.eta = 0.5 * max_stable_eta(1.0, 100, 1);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const RunResult res = convergence_experiment(quad, m, opt, est, 1000, seed + s);
      converged += !res.diverged && decreasing_trend(res.records);
      runs.push_back(res.records);
    }
    BoundInputs in;
    in.eta = opt.eta;
    in.d = 100;
    in.epsilon = est.epsilon;
    const BoundCheck c = check_bound(runs, ensemble_bound(f, runs, in));
    r.at_most("analysis." + tag + "_bound", c.measured, c.rhs);
    r.exact("analysis." + tag + "_half_threshold_converges", std::min(converged, 4), 4);
    opt.eta = 4.0 * max_stable_eta(1.0, 100, 1);
    for (std::uint64_t s = 0; s < 5; ++s) {
      diverged += convergence_experiment(quad, m, opt, est, 1000, seed + s).diverged;
    }
    r.exact("analysis." + tag + "_4x_threshold_diverges", std::min(diverged, 4), 4);
  }
  r.holds("optim.threshold_widens_with_n",
          max_stable_eta(1.0, 100, 10) > max_stable_eta(1.0, 100, 1));
  {
    BoundInputs in;
    in.eta = 0.001;
    in.T = 100;
    in.f_first = 10.0;
    bool monotone = true;
    for (std::size_t d = 10; d < 200; d += 10) {
      in.d = d;
      in.n = 4;
      const double base = theorem_bound(Family::kFmad, in).rhs;
      in.d = d + 10;
      monotone = monotone && theorem_bound(Family::kFmad, in).rhs > base;
      in.d = d;
      in.n = 2;
      monotone = monotone && theorem_bound(Family::kFmad, in).rhs > base;
    }
    r.holds("analysis.bound_monotone_in_d_and_n", monotone);
  }
  {
    opt.eta = 0.5 * max_stable_eta(1.0, 100, 1);
    const Method m{Family::kZo, Variant::kVanilla};
    const RunResult a = convergence_experiment(quad, m, opt, est, 200, seed);
    const RunResult b = convergence_experiment(quad, m, opt, est, 200, seed);
    bool same = a.records.size() == b.records.size();
    for (std::size_t i = 0; same && i < a.records.size(); ++i) {
      same = std::bit_cast<std::uint64_t>(a.records[i].loss) ==
                 std::bit_cast<std::uint64_t>(b.records[i].loss) &&
             a.records[i].flops_cum == b.records[i].flops_cum;
    }
    r.holds("analysis.run_deterministic", same);
  }
  {
    // AdamW rescales every coordinate to unit step size, so jvps on the
    // ill-conditioned quadratic jump when stiff coordinates overshoot.
    SyntheticProblem ill(make_ill_conditioned(20, 1.0, 1000.0));
    int majority = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      OptimizerConfig sgd;
      sgd.eta = 0.5 * max_stable_eta(1.0, 20, 1);
      OptimizerConfig adam = sgd;
      adam.kind = OptimizerKind::kAdamw;
      adam.eta = 0.05;
      const Method m{Family::kFmad, Variant::kVanilla};
      const auto rs = convergence_experiment(ill, m, sgd, est, 2000, seed + s).records;
      const auto ra = convergence_experiment(ill, m, adam, est, 2000, seed + s).records;
      majority += jvp_spike_report(ra).spike_iterations.size() >=
                  jvp_spike_report(rs).spike_iterations.size();
    }
    r.exact("analysis.spikes_adamw_at_least_sgd", std::min(majority, 3), 3);
  }
  {
    const Batch data = make_blobs(256, 64, 4, 1.0, seed);
    const double L = softmax_linear_smoothness(data.x);
    ModelProblem prob(Model::parse("linear:64:4"), data,
                      LossSpec{LossKind::kCrossEntropy}, 32);
    RunOptions quiet;
    quiet.telemetry = false;
    auto accuracy = [&](Method m, double eta, std::size_t n, std::uint64_t s) {
      OptimizerConfig o;
      o.eta = eta;
      EstimatorConfig e;
      e.n = n;
      return convergence_experiment(prob, m, o, e, 5000, s, quiet).final_accuracy.value_or(0);
    };
    const double fe = 0.5 * max_stable_eta(L, prob.full().dim(), 1);
    int ordered = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const double bp = accuracy({Family::kBp, Variant::kVanilla}, 0.5 / L, 1, seed + s);
      const double fm = accuracy({Family::kFmad, Variant::kVanilla}, fe, 1, seed + s);
      const double zo = accuracy({Family::kZo, Variant::kVanilla}, fe, 1, seed + s);
      ordered += bp >= fm && fm >= zo;
    }
    r.exact("analysis.blobs_accuracy_ordering", std::min(ordered, 3), 3);
  }
}

}  // namespace

std::vector<VerifyEntry> run_verify(std::string_view suite, const VerifyOptions& options) {
  const bool all = suite == "all";
  if (!all && suite != "accounting" && suite != "lemmas" && suite != "theorems") {
    throw ConfigError("unknown suite '" + std::string(suite) +
                      "' (expected lemmas, theorems, accounting or all)");
  }
  if (!(options.tolerance_scale >= 0.0)) {
    throw ConfigError("tolerance scale must be non-negative");
  }
  std::vector<VerifyEntry> entries;
  if (all || suite == "accounting") {
    Report r("accounting", options.tolerance_scale, entries);
    accounting_suite(r, options.seed);
  }
  if (all || suite == "lemmas") {
    Report r("lemmas", options.tolerance_scale, entries);
    lemma_suite(r, options.seed);
  }
  if (all || suite == "theorems") {
    Report r("theorems", options.tolerance_scale, entries);
    theorem_suite(r, options.seed);
  }
  return entries;
}

std::string verify_report_json(const std::vector<VerifyEntry>& entries) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  std::size_t failed = 0;
  for (const VerifyEntry& e : entries) {
    nlohmann::ordered_json item;
    item["suite"] = e.suite;
    item["property"] = e.property;
    item["measured"] = e.measured;
    item["predicted"] = e.predicted;
    item["tolerance"] = e.tolerance;
    item["pass"] = e.pass;
    failed += !e.pass;
    list.push_back(std::move(item));
  }
  doc["passed"] = entries.size() - failed;
  doc["failed"] = failed;
  doc["entries"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace gradbench
