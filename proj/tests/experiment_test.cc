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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gradbench/errors.h"
#include "gradbench/experiment.h"
#include "gradbench/optim.h"
#include "gradbench/synthetic.h"
#include "json.hpp"

namespace gradbench {
namespace {

constexpr const char* kMinimal = R"(
[experiment]
method = fmad-vanilla
iterations = 30
seed = 4

[objective]
kind = quadratic
d = 8

[optimizer]
eta = 0.05
)";

constexpr const char* kBlobs = R"(
[experiment]
method = bp-vanilla
iterations = 20
seed = 1

[objective]
kind = blobs
d = 8
classes = 3
samples = 48
batch_size = 16

[model]
spec = linear:8:16,tanh,linear:16:16,tanh,linear:16:16,tanh,linear:16:3

[optimizer]
eta = 0.1
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / ("gradbench_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::size_t error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseConfig, RoundTrip) {
  const ExperimentConfig cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.method.name(), "fmad-vanilla");
  EXPECT_EQ(cfg.iterations, 30u);
  EXPECT_EQ(cfg.objective.d, 8u);
  const std::string text = serialize_config(cfg);
  EXPECT_EQ(serialize_config(parse_config(text)), text);
  const std::string blobs = serialize_config(parse_config(kBlobs));
  EXPECT_EQ(serialize_config(parse_config(blobs)), blobs);
}

TEST(ParseConfig, UnknownMethodNamesClosedSet) {
  try {
    parse_config("[experiment]\nmethod = zo-magic\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("zo-vanilla"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[experiment]\nmethod = bp-vanilla\n[optimizer]\neta = 0\n"), 4u);
  EXPECT_EQ(error_line("[experiment]\nmethod = bp-vanilla\nbogus = 1\n"), 3u);
  EXPECT_EQ(error_line("[experiment]\nmethod = bp-vanilla\nseed = 1\nseed = 2\n"), 4u);
  EXPECT_EQ(error_line("[nowhere]\n"), 1u);
  EXPECT_EQ(error_line("[optimizer]\neta = -1\n[experiment]\nmethod = bp-vanilla\n"), 2u);
  EXPECT_THROW(parse_config("[optimizer]\neta = 0.1\n"), ConfigError);
}

TEST(ParseConfig, CommentsAndDefaults) {
  const ExperimentConfig cfg =
      parse_config("# a comment\n[experiment]\nmethod = zo-multiple  # trailing\n");
  EXPECT_EQ(cfg.estimator.n, 10u);
  EXPECT_EQ(cfg.estimator.base, BaseEstimator::kZo);
}

TEST(ParseConfig, ModelNeedsDataObjective) {
  EXPECT_THROW(parse_config("[experiment]\nmethod = bp-vanilla\n[model]\nspec = linear:2:2\n"),
               ConfigError);
}

TEST(Run, CsvIsByteIdenticalAcrossRuns) {
  const ExperimentConfig cfg = parse_config(kMinimal);
  const std::string a = to_csv(cfg, run_experiment(cfg));
  const std::string b = to_csv(cfg, run_experiment(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), kCsvHeader);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 31);
}

TEST(Run, ZeroIterationsIsHeaderOnly) {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.iterations = 0;
  EXPECT_EQ(to_csv(cfg, run_experiment(cfg)), std::string(kCsvHeader) + "\n");
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

TEST(Run, CheckpointingChangesOnlyMemory) {
  ExperimentConfig v = parse_config(kBlobs);
  ExperimentConfig c = v;
  c.method = Method::parse("bp-checkpointing");
  const auto rv = rows(to_csv(v, run_experiment(v)));
  const auto rc = rows(to_csv(c, run_experiment(c)));
  ASSERT_EQ(rv.size(), rc.size());
  for (std::size_t i = 0; i < rv.size(); ++i) {
    EXPECT_EQ(rv[i][1], rc[i][1]);
    EXPECT_NE(rv[i][6], rc[i][6]);
  }
}

TEST(Run, CsvColumnsForBp) {
  const ExperimentConfig cfg = parse_config(kBlobs);
  const auto r = rows(to_csv(cfg, run_experiment(cfg)));
  ASSERT_EQ(r.front().size(), 12u);
  EXPECT_EQ(r.front()[8], "bp-vanilla");
  EXPECT_EQ(r.front()[9], "0");
  EXPECT_EQ(r.front()[10], "0.10000000000000001");
  EXPECT_EQ(r.front()[3], "nan");
}

TEST(Run, UnwritableOutputThrows) {
  EXPECT_ANY_THROW(write_file("/nonexistent_dir_for_gradbench/x/run.csv", "x"));
}

TEST(Run, EveryMethodRunsEndToEnd) {
  for (const std::string& name : method_names()) {
    ExperimentConfig cfg = parse_config(kBlobs);
    cfg.method = Method::parse(name);
    cfg.iterations = 12;
    cfg.estimator.n = 3;
    cfg.estimator.accumulation_window = 4;
    cfg.optimizer.eta = 0.01;
    const RunResult r = run_experiment(cfg);
    EXPECT_EQ(r.records.size(), 12u) << name;
    EXPECT_FALSE(r.diverged) << name;
    EXPECT_TRUE(std::isfinite(r.final_loss)) << name;
  }
}

TEST(Run, DivergenceIsDataNotError) {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.objective.d = 100;
  cfg.optimizer.eta = 4.0 * max_stable_eta(1.0, 100, 1);
  cfg.iterations = 1000;
  const RunResult r = run_experiment(cfg);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.records.size(), 1000u);
  EXPECT_FALSE(r.divergence_reason.empty());
}

TEST(Sweep, AxisErrors) {
  const ExperimentConfig bp = parse_config(kBlobs);
  EXPECT_THROW(sweep_config(bp, "n", 10), ConfigError);
  EXPECT_THROW(sweep_config(bp, "epsilon", 1e-3), ConfigError);
  EXPECT_THROW(sweep_config(bp, "d", 16), ConfigError);
  EXPECT_THROW(sweep_config(bp, "width", 16), ConfigError);
  EXPECT_THROW(run_sweep(bp, "eta", {}, fresh_dir("empty").string(), 1), ConfigError);
  const ExperimentConfig fm = parse_config(kMinimal);
  EXPECT_THROW(sweep_config(fm, "epsilon", 1e-3), ConfigError);
  EXPECT_EQ(sweep_config(fm, "d", 20).objective.d, 20u);
  EXPECT_EQ(sweep_config(fm, "sigma2", 2.0).estimator.sigma2, 2.0);
}

TEST(Sweep, WritesFilesAndSummary) {
  ExperimentConfig cfg = parse_config(kMinimal);
  const auto dir = fresh_dir("eta");
  const std::vector<double> etas = {0.01, 0.1};
  const auto points = run_sweep(cfg, "eta", etas, dir.string(), 2);
  ASSERT_EQ(points.size(), 2u);
  for (const auto& p : points) EXPECT_TRUE(std::filesystem::exists(p.csv_path)) << p.csv_path;
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0]["point"], "eta=0.01");
  for (const char* key : {"final_loss", "diverged", "flops_total", "peak_act_units", "wall_ms"}) {
    EXPECT_TRUE(summary[0].contains(key)) << key;
  }
  // Parallel workers do not change the per-point CSVs.
  const auto serial_dir = fresh_dir("eta_serial");
  const auto serial = run_sweep(cfg, "eta", etas, serial_dir.string(), 1);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(slurp(points[i].csv_path), slurp(serial[i].csv_path));
  }
}

TEST(Sweep, DivergenceOnlyAboveThreshold) {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.objective.d = 100;
  cfg.iterations = 1000;
  const double t = max_stable_eta(1.0, 100, 1);
  const std::vector<double> fractions = {0.25, 0.5, 0.9, 4.0, 8.0};
  std::vector<double> etas;
  for (double f : fractions) etas.push_back(f * t);
  const auto points = run_sweep(cfg, "eta", etas, fresh_dir("threshold").string(), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    EXPECT_EQ(points[i].diverged, fractions[i] > 1.0) << points[i].point;
  }
}

TEST(Sweep, MorePerturbationsLowerFinalLoss) {
  ExperimentConfig cfg = parse_config(R"(
[experiment]
method = fmad-multiple
iterations = 300
[objective]
kind = blobs
d = 16
classes = 4
samples = 128
batch_size = 32
[optimizer]
eta = 0.02
)");
  int ordered = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto points = run_sweep(cfg, "n", {1, 10, 50},
                                  fresh_dir("n" + std::to_string(seed)).string(), 1);
    ordered += points[0].final_loss >= points[1].final_loss &&
               points[1].final_loss >= points[2].final_loss;
  }
  EXPECT_GE(ordered, 3);
}

}  // namespace
}  // namespace gradbench
