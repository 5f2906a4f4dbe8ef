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

#include "gradbench/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "gradbench/errors.h"
#include "gradbench/model_objective.h"
#include "gradbench/synthetic.h"
#include "json.hpp"

namespace gradbench {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("expected a number, got '" + std::string(text) + "'", line);
  }
  return value;
}

std::uint64_t parse_uint(std::string_view text, std::size_t line) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(text) + "'",
                      line);
  }
  return value;
}

bool parse_bool(std::string_view text, std::size_t line) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("expected true or false, got '" + std::string(text) + "'", line);
}

std::vector<double> parse_list(std::string_view text, std::size_t line) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        trim(text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                                : comma - start));
    if (!item.empty()) values.push_back(parse_double(item, line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (double v : values) out += (out.empty() ? "" : ",") + format_double(v);
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::size_t)>;

Setter size_setter(std::size_t ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view v, std::size_t line) {
    c.*field = parse_uint(v, line);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.method",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         try {
           c.method = Method::parse(v);
         } catch (const ConfigError& e) {
           throw ConfigError(e.what(), line);
         }
       }},
      {"experiment.iterations", size_setter(&ExperimentConfig::iterations)},
      {"experiment.seed",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.seed = parse_uint(v, line);
       }},
      {"experiment.output",
       [](ExperimentConfig& c, std::string_view v, std::size_t) { c.output = v; }},
      {"experiment.telemetry",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.telemetry = parse_bool(v, line);
       }},
      {"objective.kind",
       [](ExperimentConfig& c, std::string_view v, std::size_t) { c.objective.kind = v; }},
      {"objective.d",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.d = parse_uint(v, line);
       }},
      {"objective.L",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.L = parse_double(v, line);
       }},
      {"objective.condition",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.condition = parse_double(v, line);
       }},
      {"objective.gradient",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.gradient = parse_list(v, line);
       }},
      {"objective.init_scale",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.init_scale = parse_double(v, line);
       }},
      {"objective.samples",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.samples = parse_uint(v, line);
       }},
      {"objective.classes",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.classes = parse_uint(v, line);
       }},
      {"objective.separation",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.separation = parse_double(v, line);
       }},
      {"objective.batch_size",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.batch_size = parse_uint(v, line);
       }},
      {"objective.noise",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.noise = parse_double(v, line);
       }},
      {"objective.data_seed",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.objective.data_seed = parse_uint(v, line);
       }},
      {"model.spec",
       [](ExperimentConfig& c, std::string_view v, std::size_t) { c.model = v; }},
      {"model.checkpoint_segment",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.checkpoint_segment = parse_uint(v, line);
       }},
      {"optimizer.kind",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         try {
           c.optimizer.kind = parse_optimizer_kind(v);
         } catch (const ConfigError& e) {
           throw ConfigError(e.what(), line);
         }
       }},
      {"optimizer.eta",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.optimizer.eta = parse_double(v, line);
       }},
      {"optimizer.momentum",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.optimizer.momentum = parse_double(v, line);
       }},
      {"optimizer.beta1",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.optimizer.beta1 = parse_double(v, line);
       }},
      {"optimizer.beta2",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.optimizer.beta2 = parse_double(v, line);
       }},
      {"optimizer.weight_decay",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.optimizer.weight_decay = parse_double(v, line);
       }},
      {"optimizer.eps",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.optimizer.eps = parse_double(v, line);
       }},
      {"estimator.n",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.n = parse_uint(v, line);
       }},
      {"estimator.mode",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         try {
           c.estimator.mode = parse_execution_mode(v);
         } catch (const ConfigError& e) {
           throw ConfigError(e.what(), line);
         }
       }},
      {"estimator.epsilon",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.epsilon = parse_double(v, line);
       }},
      {"estimator.sigma2",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.sigma2 = parse_double(v, line);
       }},
      {"estimator.accumulation_window",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.accumulation_window = parse_uint(v, line);
       }},
      {"estimator.svrg_interval",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.svrg_interval = parse_uint(v, line);
       }},
      {"estimator.svrg_full_n",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.svrg_full_n = parse_uint(v, line);
       }},
      {"estimator.sparse_fraction",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.sparse_fraction = parse_double(v, line);
       }},
      {"estimator.adaptive_calibration_count",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.adaptive_calibration_count = parse_uint(v, line);
       }},
      {"estimator.rolling_beta",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.estimator.rolling_beta = parse_double(v, line);
       }},
      {"sweep.axis",
       [](ExperimentConfig& c, std::string_view v, std::size_t) { c.sweep_axis = v; }},
      {"sweep.values",
       [](ExperimentConfig& c, std::string_view v, std::size_t line) {
         c.sweep_values = parse_list(v, line);
       }},
  };
  return table;
}

bool uses_model(const ObjectiveConfig& o) {
  return o.kind == "blobs" || o.kind == "regression";
}

std::string default_model(const ExperimentConfig& cfg) {
  if (!cfg.model.empty()) return cfg.model;
  if (cfg.objective.kind == "blobs") {
    return "linear:" + std::to_string(cfg.objective.d) + ":" +
           std::to_string(cfg.objective.classes);
  }
  return {};
}

void set_sweep_value(ExperimentConfig& cfg, std::string_view axis, double value) {
  auto as_count = [&](const char* what) {
    if (!(value >= 1.0) || value != std::floor(value)) {
      throw ConfigError(std::string(what) + " sweep values must be positive integers");
    }
    return static_cast<std::size_t>(value);
  };
  if (axis == "eta") {
    cfg.optimizer.eta = value;
  } else if (axis == "n") {
    cfg.estimator.n = as_count("n");
  } else if (axis == "d") {
    cfg.objective.d = as_count("d");
  } else if (axis == "epsilon") {
    cfg.estimator.epsilon = value;
  } else if (axis == "sigma2") {
    cfg.estimator.sigma2 = value;
  } else {
    throw ConfigError("unknown sweep axis '" + std::string(axis) +
                      "' (expected eta, n, d, epsilon or sigma2)");
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ExperimentConfig::validate() const {
  optimizer.validate();
  estimator.validate();
  const ObjectiveConfig& o = objective;
  static const std::set<std::string> kinds = {"quadratic", "ill-conditioned", "linear",
                                              "blobs", "regression"};
  if (!kinds.count(o.kind)) {
    throw ConfigError("unknown objective kind '" + o.kind +
                      "' (expected quadratic, ill-conditioned, linear, blobs or "
                      "regression)");
  }
  if (o.d == 0) throw ConfigError("objective d must be positive");
  if (!(o.L > 0.0)) throw ConfigError("objective L must be positive");
  if (!(o.condition >= 1.0)) throw ConfigError("objective condition must be >= 1");
  if (!o.gradient.empty() && o.gradient.size() != o.d) {
    throw ConfigError("objective gradient must have d entries");
  }
  if (uses_model(o)) {
    if (o.samples == 0 || o.batch_size == 0) {
      throw ConfigError("samples and batch_size must be positive");
    }
    if (o.kind == "blobs" && o.classes < 2) throw ConfigError("blobs need >= 2 classes");
    if (o.kind == "regression" && model.empty()) {
      throw ConfigError("regression objective needs [model] spec");
    }
    const Model m = Model::parse(default_model(*this));
    if (o.kind == "blobs" && (m.input_dim() != o.d || m.output_dim() != o.classes)) {
      throw ConfigError("blobs model must map d inputs to `classes` outputs");
    }
  } else if (!model.empty()) {
    throw ConfigError("a model spec needs a blobs or regression objective");
  }
  if (checkpoint_segment && *checkpoint_segment == 0) {
    throw ConfigError("checkpoint_segment must be positive");
  }
  if (!sweep_axis.empty()) {
    ExperimentConfig probe = *this;
    probe.sweep_axis.clear();
    for (double v : sweep_values) sweep_config(probe, sweep_axis, v);
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t method_line = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(
        start, nl == std::string_view::npos ? text.size() - start : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections = {"experiment", "objective", "model",
                                                     "optimizer", "estimator", "sweep"};
      if (!sections.count(section)) {
        throw ConfigError("unknown section [" + section + "]", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
    if (section.empty()) throw ConfigError("key outside of a section", line_no);
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    if (key == "experiment.method") method_line = line_no;
    it->second(cfg, value, line_no);
    try {
      if (section == "optimizer") cfg.optimizer.validate();
      if (section == "estimator") cfg.estimator.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
  if (method_line == 0) throw ConfigError("missing [experiment] method");
  if (cfg.method.variant == Variant::kMultiple && !seen.count("estimator.n")) {
    cfg.estimator.n = 10;
  }
  if (cfg.method.family != Family::kBp) {
    cfg.estimator.base =
        cfg.method.family == Family::kZo ? BaseEstimator::kZo : BaseEstimator::kFmad;
  }
  cfg.validate();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const ObjectiveConfig& o = cfg.objective;
  const EstimatorConfig& e = cfg.estimator;
  const OptimizerConfig& p = cfg.optimizer;
  out << "[experiment]\n"
      << "method = " << cfg.method.name() << "\n"
      << "iterations = " << cfg.iterations << "\n"
      << "seed = " << cfg.seed << "\n"
      << "output = " << cfg.output << "\n"
      << "telemetry = " << (cfg.telemetry ? "true" : "false") << "\n\n"
      << "[objective]\n"
      << "kind = " << o.kind << "\n"
      << "d = " << o.d << "\n"
      << "L = " << format_double(o.L) << "\n"
      << "condition = " << format_double(o.condition) << "\n";
  if (!o.gradient.empty()) out << "gradient = " << format_list(o.gradient) << "\n";
  out << "init_scale = " << format_double(o.init_scale) << "\n"
      << "samples = " << o.samples << "\n"
      << "classes = " << o.classes << "\n"
      << "separation = " << format_double(o.separation) << "\n"
      << "batch_size = " << o.batch_size << "\n"
      << "noise = " << format_double(o.noise) << "\n"
      << "data_seed = " << o.data_seed << "\n\n";
  if (!cfg.model.empty() || cfg.checkpoint_segment) {
    out << "[model]\n";
    if (!cfg.model.empty()) out << "spec = " << cfg.model << "\n";
    if (cfg.checkpoint_segment) {
      out << "checkpoint_segment = " << *cfg.checkpoint_segment << "\n";
    }
    out << "\n";
  }
  out << "[optimizer]\n"
      << "kind = " << optimizer_name(p.kind) << "\n"
      << "eta = " << format_double(p.eta) << "\n"
      << "momentum = " << format_double(p.momentum) << "\n"
      << "beta1 = " << format_double(p.beta1) << "\n"
      << "beta2 = " << format_double(p.beta2) << "\n"
      << "weight_decay = " << format_double(p.weight_decay) << "\n"
      << "eps = " << format_double(p.eps) << "\n\n"
      << "[estimator]\n"
      << "n = " << e.n << "\n"
      << "mode = " << execution_mode_name(e.mode) << "\n"
      << "epsilon = " << format_double(e.epsilon) << "\n"
      << "sigma2 = " << format_double(e.sigma2) << "\n"
      << "accumulation_window = " << e.accumulation_window << "\n"
      << "svrg_interval = " << e.svrg_interval << "\n"
      << "svrg_full_n = " << e.svrg_full_n << "\n"
      << "sparse_fraction = " << format_double(e.sparse_fraction) << "\n"
      << "adaptive_calibration_count = " << e.adaptive_calibration_count << "\n"
      << "rolling_beta = " << format_double(e.rolling_beta) << "\n";
  if (!cfg.sweep_axis.empty()) {
    out << "\n[sweep]\n"
        << "axis = " << cfg.sweep_axis << "\n"
        << "values = " << format_list(cfg.sweep_values) << "\n";
  }
  return out.str();
}

std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg) {
  const ObjectiveConfig& o = cfg.objective;
  if (o.kind == "quadratic") {
    return std::make_unique<SyntheticProblem>(make_quadratic(o.d, o.L), o.init_scale);
  }
  if (o.kind == "ill-conditioned") {
    return std::make_unique<SyntheticProblem>(make_ill_conditioned(o.d, o.L, o.condition),
                                              o.init_scale);
  }
  if (o.kind == "linear") {
    std::vector<double> g = o.gradient;
    if (g.empty()) {
      g.assign(o.d, 0.0);
      g[0] = 1.0;
    }
    return std::make_unique<SyntheticProblem>(make_linear(std::move(g)), o.init_scale);
  }
  Model model = Model::parse(default_model(cfg));
  if (o.kind == "blobs") {
    Batch data = make_blobs(o.samples, o.d, o.classes, o.separation, o.data_seed);
    return std::make_unique<ModelProblem>(std::move(model), std::move(data),
                                          LossSpec{LossKind::kCrossEntropy},
                                          o.batch_size, cfg.checkpoint_segment);
  }
  if (o.kind == "regression") {
    Batch data = make_regression(model, o.samples, o.noise, o.data_seed);
    return std::make_unique<ModelProblem>(std::move(model), std::move(data),
                                          LossSpec{LossKind::kMse}, o.batch_size,
                                          cfg.checkpoint_segment);
  }
  throw ConfigError("unknown objective kind '" + o.kind + "'");
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto problem = build_problem(cfg);
  RunOptions options;
  options.telemetry = cfg.telemetry;
  return convergence_experiment(*problem, cfg.method, cfg.optimizer, cfg.estimator,
                                cfg.iterations, cfg.seed, options);
}

std::size_t effective_n(const ExperimentConfig& cfg) {
  if (cfg.method.family == Family::kBp) return 0;
  switch (cfg.method.variant) {
    case Variant::kMultiple:
    case Variant::kSparse:
      return cfg.estimator.n;
    default:
      return 1;
  }
}

void write_csv(std::ostream& out, const ExperimentConfig& cfg, const RunResult& result) {
  out << kCsvHeader << "\n";
  const std::string tail = "," + cfg.method.name() + "," +
                           std::to_string(effective_n(cfg)) + "," +
                           format_double(cfg.optimizer.eta) + "," +
                           std::to_string(cfg.seed) + "\n";
  for (const RunRecord& r : result.records) {
    out << r.iter << "," << format_double(r.loss) << "," << format_double(r.grad_norm_sq)
        << "," << format_double(r.jvp_mean) << "," << format_double(r.jvp_max) << ","
        << r.flops_cum << "," << r.peak_act_units << "," << format_double(r.update_norm)
        << tail;
  }
}

std::string to_csv(const ExperimentConfig& cfg, const RunResult& result) {
  std::ostringstream out;
  write_csv(out, cfg, result);
  return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  file << contents;
  file.close();
  if (!file) throw std::runtime_error("failed writing '" + path + "'");
}

namespace {

// Shortest text that round-trips, for file names and summary labels.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

ExperimentConfig sweep_config(const ExperimentConfig& base, std::string_view axis,
                              double value) {
  const Method m = base.method;
  const bool bp = m.family == Family::kBp;
  if (axis == "n" && (bp || (m.variant != Variant::kMultiple &&
                             m.variant != Variant::kSparse))) {
    throw ConfigError("n sweep needs a multiple or sparse perturbation method, not " +
                      m.name());
  }
  if (axis == "epsilon" && m.family != Family::kZo) {
    throw ConfigError("epsilon sweep needs a zo method, not " + m.name());
  }
  if (axis == "sigma2" && bp) {
    throw ConfigError("sigma2 sweep needs a perturbation method, not " + m.name());
  }
  if (axis == "d" && !base.model.empty()) {
    throw ConfigError("d sweep cannot change an explicit model spec");
  }
  ExperimentConfig cfg = base;
  cfg.sweep_axis.clear();
  cfg.sweep_values.clear();
  set_sweep_value(cfg, axis, value);
  cfg.validate();
  return cfg;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, std::string_view axis,
                                  const std::vector<double>& values,
                                  const std::string& out_dir, std::size_t workers) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (double v : values) configs.push_back(sweep_config(base, axis, v));
  std::filesystem::create_directories(out_dir);

  std::vector<SweepPoint> points(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const RunResult result = run_experiment(configs[i]);
        SweepPoint& p = points[i];
        p.point = std::string(axis) + "=" + shortest(values[i]);
        p.csv_path = (std::filesystem::path(out_dir) / (std::string(axis) + "_" +
                                                        shortest(values[i]) + ".csv"))
                         .string();
        write_file(p.csv_path, to_csv(configs[i], result));
        p.final_loss = result.final_loss;
        p.diverged = result.diverged;
        p.flops_total = result.flops_total;
        p.peak_act_units = result.peak_act_units;
        p.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(workers, 1, configs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < count; ++i) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  write_file((std::filesystem::path(out_dir) / "summary.json").string(),
             sweep_summary_json(points));
  return points;
}

std::string sweep_summary_json(const std::vector<SweepPoint>& points) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const SweepPoint& p : points) {
    nlohmann::ordered_json entry;
    entry["point"] = p.point;
    entry["final_loss"] = std::isfinite(p.final_loss)
                              ? nlohmann::ordered_json(p.final_loss)
                              : nlohmann::ordered_json(nullptr);
    entry["diverged"] = p.diverged;
    entry["flops_total"] = p.flops_total;
    entry["peak_act_units"] = p.peak_act_units;
    entry["wall_ms"] = p.wall_ms;
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace gradbench
