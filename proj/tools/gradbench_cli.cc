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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradbench/errors.h"
#include "gradbench/experiment.h"
#include "gradbench/verify.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gradbench::ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string output_path(const std::string& out_dir, const std::string& file) {
  if (out_dir.empty()) return file;
  std::filesystem::create_directories(out_dir);
  return (std::filesystem::path(out_dir) / std::filesystem::path(file).filename()).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradbench: gradient engines and benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;

  auto* run = app.add_subcommand("run", "Run one experiment and write its CSV");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--workers", workers, "Accepted for symmetry; runs are single-threaded");

  std::string suite = "all";
  double tolerance_scale = 1.0;
  auto* verify = app.add_subcommand("verify", "Run property suites and emit a JSON report");
  verify->add_option("--suite", suite, "lemmas, theorems, accounting or all");
  verify->add_option("--out", out_dir, "Directory for verify.json (stdout otherwise)");
  verify->add_option("--seed", seed, "Seed for stochastic checks");
  verify->add_option("--tolerance-scale", tolerance_scale,
                     "Multiplier on stochastic tolerances");
  verify->add_option("--workers", workers, "Ignored");

  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run a one-axis sweep");
  sweep->add_option("--config", config_path, "Base config file")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--axis", axis, "eta, n, d, epsilon or sigma2");
  sweep->add_option("--values", values, "Axis values")->delimiter(',');
  sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_option("--workers", workers, "Concurrent points")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      gradbench::ExperimentConfig cfg = gradbench::parse_config(read_file(config_path));
      if (seed) cfg.seed = *seed;
      const gradbench::RunResult result = gradbench::run_experiment(cfg);
      const std::string path = output_path(out_dir, cfg.output);
      gradbench::write_file(path, gradbench::to_csv(cfg, result));
      std::cerr << path << ": " << result.records.size() << " rows"
                << (result.diverged ? " (diverged: " + result.divergence_reason + ")" : "")
                << "\n";
      return 0;
    }
    if (*verify) {
      gradbench::VerifyOptions options;
      options.tolerance_scale = tolerance_scale;
      if (seed) options.seed = *seed;
      const auto entries = gradbench::run_verify(suite, options);
      const std::string report = gradbench::verify_report_json(entries);
      if (out_dir.empty()) {
        std::cout << report;
      } else {
        const std::string path = output_path(out_dir, "verify.json");
        gradbench::write_file(path, report);
        std::cerr << path << "\n";
      }
      std::size_t failed = 0;
      for (const auto& e : entries) {
        if (!e.pass) {
          ++failed;
          std::cerr << "FAIL " << e.suite << "/" << e.property << ": measured "
                    << e.measured << ", predicted " << e.predicted << "\n";
        }
      }
      return failed == 0 ? 0 : 1;
    }
    gradbench::ExperimentConfig cfg = gradbench::parse_config(read_file(config_path));
    if (seed) cfg.seed = *seed;
    if (axis.empty()) axis = cfg.sweep_axis;
    if (values.empty()) values = cfg.sweep_values;
    if (axis.empty()) throw gradbench::ConfigError("sweep needs an axis");
    const auto points = gradbench::run_sweep(cfg, axis, values, out_dir, workers);
    for (const auto& p : points) {
      std::cerr << p.point << ": final_loss " << gradbench::format_double(p.final_loss)
                << (p.diverged ? " diverged" : "") << "\n";
    }
    return 0;
  } catch (const gradbench::ConfigError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
