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

#ifndef TWOBLOCK__METRICS_HPP_
#define TWOBLOCK__METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twoblock/model.hpp"
#include "twoblock/trajectory.hpp"

namespace twoblock
{

// Mean Euclidean distance over steps.
double ade(const Track & pred, const Track & gt);
// Euclidean distance at the final step.
double fde(const Track & pred, const Track & gt);
std::vector<double> de_per_step(const Track & pred, const Track & gt);

enum class Aggregation { kBest, kMean };
std::string to_string(Aggregation agg);
Aggregation parse_aggregation(std::string_view tag);

std::string format_ratio(const std::optional<double> & ratio);

/// One (model, scene, horizon, miss ratio, aggregation) row of an evaluation.
struct EvalRecord
{
  std::string model;
  std::string scene;
  std::size_t obs_len = 0;
  std::size_t pred_len = 0;
  std::optional<double> miss_ratio;  // empty: Uniform(0.2, 0.8) per window
  Aggregation agg = Aggregation::kBest;
  double ade_m = 0.0;
  double fde_m = 0.0;
  std::vector<double> de_m;  // mean displacement error per prediction step
  std::size_t n_windows = 0;
  std::uint64_t seed = 0;
  // Mean wall-clock per window. Models that do not impute have no fill phase.
  std::optional<double> fill_ms;
  double encode_ms = 0.0;
  double predict_ms = 0.0;
  std::size_t gap_steps = 0;  // total g_i invocations over all windows
  std::size_t mask_regenerations = 0;
};

struct EvalOptions
{
  std::size_t samples = 1;
  Aggregation agg = Aggregation::kBest;
  std::optional<double> miss_ratio;
  std::uint64_t seed = 0;
};

// One mask per window drawn from the "eval-masks" stream of `seed`.
std::vector<MaskDraw> eval_masks(const std::vector<MaskedTrajectory> & windows,
                                 std::uint64_t seed, std::optional<double> ratio);

// Per window: mask, encode, decode `samples` tracks over the window's full future, and score
// the best-of-k (by ADE) or the mean trajectory. Windows are in meters.
EvalRecord evaluate(const Model & m, const std::vector<MaskedTrajectory> & windows,
                    const std::vector<MaskDraw> & masks, const EvalOptions & options,
                    const std::string & scene);
EvalRecord evaluate(const Model & m, const std::vector<MaskedTrajectory> & windows,
                    const EvalOptions & options, const std::string & scene);

inline constexpr std::string_view kMetricsHeader =
  "model,scene,obs_len,pred_len,miss_ratio,agg,ade_m,fde_m,n_windows,seed,fill_ms,encode_ms,"
  "predict_ms";
inline constexpr std::string_view kDeHeader = "model,scene,miss_ratio,step,de_m";

// Timing columns are left empty unless `with_timing`.
void write_metrics_csv(std::ostream & out, const std::vector<EvalRecord> & records,
                       bool with_timing);
// Steps are numbered from 1.
void write_de_csv(std::ostream & out, const std::vector<EvalRecord> & records);

}  // namespace twoblock

#endif  // TWOBLOCK__METRICS_HPP_
