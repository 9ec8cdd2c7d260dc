// Copyright 2026 The twoblock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TWOBLOCK__CLI_HPP_
#define TWOBLOCK__CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "twoblock/metrics.hpp"
#include "twoblock/model.hpp"

namespace twoblock
{

/// Merged run configuration (config file values overridden by flags).
struct RunConfig
{
  std::string command;
  std::filesystem::path data_dir = "datasets";
  std::string test_scene = "zara2";
  std::size_t obs_len = 8;
  std::size_t pred_len = 8;
  std::string model = "twoblock";
  std::size_t hidden = 32;        // single-encoder width of the imputation baselines
  std::size_t block_hidden = 16;  // per-block width of the two-block encoder
  std::size_t samples = 1;
  std::string agg = "best";
  std::size_t epochs = 200;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::optional<std::uint64_t> seed;
  std::string miss_ratio = "uniform";
  std::vector<std::size_t> horizons;
  std::filesystem::path out_dir = "runs";
  std::string config_file;

  std::size_t stride = 1;
  std::size_t eval_stride = 1;
  bool resample_masks = false;
  bool zero_fill_raw = false;
  bool with_timing = false;
  std::size_t bench_reps = 1000;

  // Throws UsageError naming the offending field.
  void validate() const;
  std::optional<double> fixed_ratio() const;
  ModelConfig model_config(ModelKind kind) const;
  // `key = value` lines covering every field plus the build version.
  std::string manifest() const;
};

std::string build_version();

inline constexpr const char * kModelTags[] = {"twoblock", "last", "zero", "linear"};

std::filesystem::path weights_path(const RunConfig & cfg, const std::string & model);

struct TrainArtifacts
{
  std::filesystem::path weights;
  std::filesystem::path manifest;
  std::filesystem::path loss_curve;
  std::vector<double> losses;
};

TrainArtifacts cmd_train(const RunConfig & cfg);

struct EvalArtifacts
{
  std::filesystem::path metrics_csv;
  std::filesystem::path de_csv;
  EvalRecord record;
};

EvalArtifacts cmd_eval(const RunConfig & cfg);

struct SweepArtifacts
{
  std::filesystem::path dir;
  std::vector<EvalRecord> grid;      // ratio grid, every model
  std::vector<EvalRecord> uniform;   // Uniform(0.2, 0.8) masks, every model
  std::vector<EvalRecord> horizons;  // horizon extension rows
};

inline constexpr double kRatioGrid[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};

SweepArtifacts cmd_sweep(const RunConfig & cfg);

struct PhaseTiming
{
  std::string model;
  std::optional<double> fill_mean_ms;
  std::optional<double> fill_std_ms;
  double encode_mean_ms = 0.0;
  double encode_std_ms = 0.0;
  double predict_mean_ms = 0.0;
  double predict_std_ms = 0.0;
  double total_mean_ms = 0.0;
  double total_std_ms = 0.0;
  std::size_t reps = 0;
};

inline constexpr const char * kTimingHeader =
  "model,fill_mean_ms,fill_std_ms,encode_mean_ms,encode_std_ms,predict_mean_ms,predict_std_ms,"
  "total_mean_ms,total_std_ms,reps";

struct BenchArtifacts
{
  std::filesystem::path timing_csv;
  std::vector<PhaseTiming> rows;
};

BenchArtifacts cmd_bench(const RunConfig & cfg);

// Summarizes every metrics CSV under the output directory into report.md.
std::filesystem::path cmd_report(const RunConfig & cfg);

// Parses arguments, dispatches, and maps errors onto exit codes.
int run_cli(int argc, char ** argv);

}  // namespace twoblock

#endif  // TWOBLOCK__CLI_HPP_
