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

#ifndef TWOBLOCK__MODEL_HPP_
#define TWOBLOCK__MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twoblock/cells.hpp"
#include "twoblock/datasets.hpp"
#include "twoblock/imputation.hpp"
#include "twoblock/numkit.hpp"
#include "twoblock/trajectory.hpp"

namespace twoblock
{

enum class ModelKind { kTwoBlock, kLast, kZero, kLinear };

std::string to_string(ModelKind kind);
// "twoblock", "last", "zero", "linear" ("linner" accepted). Throws UsageError listing the tags.
ModelKind parse_model_kind(std::string_view tag);
ImputationKind imputation_of(ModelKind kind);

struct ModelConfig
{
  ModelKind kind = ModelKind::kTwoBlock;
  // Per-block hidden channels for the two-block encoder, single encoder width otherwise.
  Eigen::Index encoder_hidden = 16;
  Eigen::Index decoder_hidden = 32;
  Eigen::Index noise_dim = 8;
  Eigen::Index readout_hidden = 0;
  std::size_t obs_len = 8;
  // Zero filling in raw meters instead of normalized units.
  bool zero_fill_raw = false;
  std::string held_out_scene;

  // 16 channels per block for the two-block model, 32 for a single encoder.
  static ModelConfig defaults(ModelKind kind);
  // Stable hash of every field that affects compatibility, as 16 hex digits.
  std::string fingerprint() const;
};

/// Encoder(s), decoder g_p, readout h_p, and the context projection that maps the final
/// encoder hidden state (plus optional noise) onto the decoder's initial hidden state.
///
/// Two-block encoders: g_c consumes a measurement, g_i is a hidden-only recurrence used at
/// missing steps; both share the hidden width. Baselines use one encoder over imputed input.
class Model
{
public:
  Model(const ModelConfig & config, const NormStats & norm, std::uint64_t init_seed);

  const ModelConfig & config() const { return config_; }
  const NormStats & norm() const { return norm_; }
  ParameterStore & params() { return params_; }
  const ParameterStore & params() const { return params_; }

  const LstmParams & encoder() const { return encoder_; }          // g_c or the baseline encoder
  const std::optional<LstmParams> & gap_encoder() const { return gap_encoder_; }  // g_i
  const LstmParams & decoder() const { return decoder_; }          // g_p
  const AffineParams & context() const { return context_; }
  const MlpParams & readout() const { return readout_; }          // h_p

private:
  ModelConfig config_;
  NormStats norm_;
  ParameterStore params_;
  LstmParams encoder_;
  std::optional<LstmParams> gap_encoder_;
  LstmParams decoder_;
  AffineParams context_;
  MlpParams readout_;
};

struct Encoding
{
  LstmState state;
  std::size_t gap_steps = 0;  // g_i invocations
};

struct TapeEncoding
{
  Tape::Node h = 0;
  Tape::Node c = 0;
  std::size_t gap_steps = 0;
};

// Inputs are in normalized space. The state after step t has consumed z_1..z_t.
TapeEncoding encode_twoblock(const Model & m, Tape & tape, const MaskedTrajectory & traj);
Encoding encode_twoblock(const Model & m, const MaskedTrajectory & traj);

// Single encoder over an already complete (imputed) normalized track.
TapeEncoding encode_filled(const Model & m, Tape & tape, const Track & filled);
// Imputes per the model's kind, then runs the single encoder.
TapeEncoding encode_baseline(const Model & m, Tape & tape, const MaskedTrajectory & traj);
Encoding encode_baseline(const Model & m, const MaskedTrajectory & traj);

// Imputation applied by a baseline model, in normalized space.
Track fill_for(const Model & m, const MaskedTrajectory & traj);

TapeEncoding encode(const Model & m, Tape & tape, const MaskedTrajectory & traj);
Encoding encode(const Model & m, const MaskedTrajectory & traj);

// Decoder rollout: seed z = h_p(s0), then s <- g_p(s, z_prev), z <- h_p(s) for each step.
// `noise` must be empty or noise_dim long (empty means zeros). Returns normalized positions.
std::vector<Tape::Node> decode(const Model & m, Tape & tape, Tape::Node encoder_h,
                               std::size_t steps, const Vec & noise);

/// k sampled future tracks in meters.
struct PredictionSet
{
  std::vector<Track> samples;
  std::vector<Vec> noises;
};

// k = 1 decodes without noise. For k > 1 each sample draws a standard-normal noise vector
// from `rng`.
PredictionSet decode(const Model & m, const LstmState & s, std::size_t steps, std::size_t k,
                     Rng * rng = nullptr);

// Normalizes a trajectory in meters, encodes, and decodes.
PredictionSet predict(const Model & m, const MaskedTrajectory & traj, std::size_t steps,
                      std::size_t k = 1, Rng * rng = nullptr);

// Mean over steps of the squared Euclidean distance.
double loss_l2(const Track & pred, const Track & gt);

struct VarietyLoss
{
  double value = 0.0;
  std::size_t best = 0;
};

// Minimum of loss_l2 over the samples.
VarietyLoss loss_variety(const std::vector<Track> & preds, const Track & gt);

// Forward and backward pass of one normalized window under the variety loss.
// Gradients are added to m.params(); returns the loss.
double window_loss(Model & m, const MaskedTrajectory & traj, std::size_t samples, Rng & noise_rng);

struct TrainConfig
{
  std::size_t epochs = 200;
  std::size_t batch = 64;
  AdamConfig adam;
  std::size_t samples = 1;
  // Fixed miss ratio; Uniform(0.2, 0.8) per sequence when empty.
  std::optional<double> miss_ratio;
  // Draw fresh masks each epoch instead of one mask per sequence for the run.
  bool resample_masks = false;
  std::uint64_t seed = 0;
  // Rescale the batch gradient to this global L2 norm when exceeded; 0 disables.
  double clip_norm = 0.0;
};

struct TrainResult
{
  std::vector<double> loss_curve;  // per-epoch mean variety loss (normalized units)
  std::size_t mask_regenerations = 0;
};

// Minimizes the variety loss with Adam over shuffled minibatches. `windows` are complete
// trajectories in meters with ground-truth futures of equal length.
TrainResult train(Model & m, const std::vector<MaskedTrajectory> & windows,
                  const TrainConfig & config);

void save_model(const std::filesystem::path & path, const Model & m);
Model load_model(const std::filesystem::path & path);

}  // namespace twoblock

#endif  // TWOBLOCK__MODEL_HPP_
