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

#include "twoblock/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include "twoblock/error.hpp"

namespace twoblock
{

std::string to_string(ModelKind kind)
{
  switch (kind) {
    case ModelKind::kTwoBlock:
      return "twoblock";
    case ModelKind::kLast:
      return "last";
    case ModelKind::kZero:
      return "zero";
    case ModelKind::kLinear:
      return "linear";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view tag)
{
  if (tag == "twoblock") {
    return ModelKind::kTwoBlock;
  }
  if (tag == "last") {
    return ModelKind::kLast;
  }
  if (tag == "zero") {
    return ModelKind::kZero;
  }
  if (tag == "linear" || tag == "linner") {
    return ModelKind::kLinear;
  }
  throw UsageError(
    "unknown model '" + std::string(tag) + "' (valid: twoblock, last, zero, linear)");
}

ImputationKind imputation_of(ModelKind kind)
{
  switch (kind) {
    case ModelKind::kLast:
      return ImputationKind::kLast;
    case ModelKind::kZero:
      return ImputationKind::kZero;
    case ModelKind::kLinear:
      return ImputationKind::kLinear;
    case ModelKind::kTwoBlock:
      break;
  }
  throw UsageError("the two-block model does not impute");
}

ModelConfig ModelConfig::defaults(ModelKind kind)
{
  ModelConfig c;
  c.kind = kind;
  c.encoder_hidden = kind == ModelKind::kTwoBlock ? 16 : 32;
  return c;
}

std::string ModelConfig::fingerprint() const
{
  std::ostringstream s;
  s << "kind=" << to_string(kind) << ";enc=" << encoder_hidden << ";dec=" << decoder_hidden
    << ";noise=" << noise_dim << ";readout=" << readout_hidden << ";obs=" << obs_len
    << ";zero_raw=" << zero_fill_raw << ";held_out=" << held_out_scene;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s.str())));
  return buf;
}

Model::Model(const ModelConfig & config, const NormStats & norm, std::uint64_t init_seed)
: config_(config), norm_(norm)
{
  norm_.validate();
  if (config_.encoder_hidden < 1 || config_.decoder_hidden < 1 || config_.noise_dim < 0 ||
      config_.readout_hidden < 0 || config_.obs_len < 1) {
    throw UsageError("model sizes must be positive");
  }
  const Eigen::Index H = config_.encoder_hidden;
  const bool twoblock = config_.kind == ModelKind::kTwoBlock;
  encoder_ = LstmParams::create(params_, twoblock ? "g_c" : "encoder", 2, H);
  if (twoblock) {
    gap_encoder_ = LstmParams::create(params_, "g_i", 0, H);
  }
  context_ = AffineParams::create(params_, "context", H + config_.noise_dim,
                                  config_.decoder_hidden);
  decoder_ = LstmParams::create(params_, "g_p", 2, config_.decoder_hidden);
  readout_ = MlpParams::create(params_, "h_p", config_.decoder_hidden, config_.readout_hidden, 2);

  Rng rng(init_seed);
  encoder_.init(params_, rng);
  if (gap_encoder_) {
    gap_encoder_->init(params_, rng);
  }
  context_.init(params_, rng);
  decoder_.init(params_, rng);
  readout_.init(params_, rng);
}

namespace
{

TapeEncoding start_encoding(const Model & m, Tape & tape)
{
  TapeEncoding enc;
  enc.h = tape.leaf(Vec::Zero(m.config().encoder_hidden));
  enc.c = tape.leaf(Vec::Zero(m.config().encoder_hidden));
  return enc;
}

Encoding finish(const Tape & tape, const TapeEncoding & enc)
{
  return Encoding{LstmState{tape.value(enc.h), tape.value(enc.c)}, enc.gap_steps};
}

}  // namespace

TapeEncoding encode_twoblock(const Model & m, Tape & tape, const MaskedTrajectory & traj)
{
  if (!m.gap_encoder()) {
    throw UsageError("encode_twoblock needs a two-block model");
  }
  if (traj.observed.size() != traj.observations.size()) {
    throw ShapeError("encode_twoblock: mask length does not match observations");
  }
  TapeEncoding enc = start_encoding(m, tape);
  for (std::size_t t = 0; t < traj.obs_len(); ++t) {
    if (traj.observed[t]) {
      const auto z = tape.leaf(traj.observations[t]);
      std::tie(enc.h, enc.c) = tape.lstm(m.encoder(), z, enc.h, enc.c);
    } else {
      std::tie(enc.h, enc.c) = tape.lstm(*m.gap_encoder(), std::nullopt, enc.h, enc.c);
      ++enc.gap_steps;
    }
  }
  return enc;
}

Encoding encode_twoblock(const Model & m, const MaskedTrajectory & traj)
{
  Tape tape(m.params());
  return finish(tape, encode_twoblock(m, tape, traj));
}

Track fill_for(const Model & m, const MaskedTrajectory & traj)
{
  const ImputationKind kind = imputation_of(m.config().kind);
  Point zero = Point::Zero();
  if (kind == ImputationKind::kZero && m.config().zero_fill_raw) {
    zero = m.norm().apply(Point::Zero());
  }
  return impute(kind, traj, zero);
}

TapeEncoding encode_filled(const Model & m, Tape & tape, const Track & filled)
{
  TapeEncoding enc = start_encoding(m, tape);
  for (const auto & z : filled) {
    const auto x = tape.leaf(z);
    std::tie(enc.h, enc.c) = tape.lstm(m.encoder(), x, enc.h, enc.c);
  }
  return enc;
}

TapeEncoding encode_baseline(const Model & m, Tape & tape, const MaskedTrajectory & traj)
{
  return encode_filled(m, tape, fill_for(m, traj));
}

Encoding encode_baseline(const Model & m, const MaskedTrajectory & traj)
{
  Tape tape(m.params());
  return finish(tape, encode_baseline(m, tape, traj));
}

TapeEncoding encode(const Model & m, Tape & tape, const MaskedTrajectory & traj)
{
  return m.config().kind == ModelKind::kTwoBlock ? encode_twoblock(m, tape, traj)
                                                 : encode_baseline(m, tape, traj);
}

Encoding encode(const Model & m, const MaskedTrajectory & traj)
{
  Tape tape(m.params());
  return finish(tape, encode(m, tape, traj));
}

std::vector<Tape::Node> decode(
  const Model & m, Tape & tape, Tape::Node encoder_h, std::size_t steps, const Vec & noise)
{
  if (steps == 0) {
    throw UsageError("decode needs at least one step");
  }
  const Eigen::Index nd = m.config().noise_dim;
  if (noise.size() != 0 && noise.size() != nd) {
    throw ShapeError(
      "decode: noise has " + std::to_string(noise.size()) + " entries, model expects " +
      std::to_string(nd));
  }
  Tape::Node context = encoder_h;
  if (nd > 0) {
    context = tape.concat(encoder_h, tape.leaf(noise.size() ? noise : Vec::Zero(nd)));
  }
  Tape::Node h = tape.affine(m.context(), context);
  Tape::Node c = tape.leaf(Vec::Zero(m.config().decoder_hidden));
  Tape::Node z = tape.mlp(m.readout(), h);
  std::vector<Tape::Node> out;
  out.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    std::tie(h, c) = tape.lstm(m.decoder(), z, h, c);
    z = tape.mlp(m.readout(), h);
    out.push_back(z);
  }
  return out;
}

PredictionSet decode(
  const Model & m, const LstmState & s, std::size_t steps, std::size_t k, Rng * rng)
{
  if (k == 0) {
    throw UsageError("decode needs at least one sample");
  }
  if (k > 1 && rng == nullptr) {
    throw UsageError("multi-sample decoding needs a random stream");
  }
  PredictionSet set;
  Tape tape(m.params());
  const auto h = tape.leaf(s.h);
  for (std::size_t i = 0; i < k; ++i) {
    Vec noise = Vec::Zero(m.config().noise_dim);
    if (k > 1) {
      for (Eigen::Index j = 0; j < noise.size(); ++j) {
        noise[j] = rng->normal();
      }
    }
    Track track;
    for (const auto node : decode(m, tape, h, steps, noise)) {
      track.push_back(m.norm().invert(Point(tape.value(node))));
    }
    set.samples.push_back(std::move(track));
    set.noises.push_back(std::move(noise));
  }
  return set;
}

PredictionSet predict(
  const Model & m, const MaskedTrajectory & traj, std::size_t steps, std::size_t k, Rng * rng)
{
  const Encoding enc = encode(m, m.norm().apply(traj));
  return decode(m, enc.state, steps, k, rng);
}

double loss_l2(const Track & pred, const Track & gt)
{
  if (pred.size() != gt.size() || pred.empty()) {
    throw ShapeError(
      "loss_l2: prediction has " + std::to_string(pred.size()) + " steps, ground truth " +
      std::to_string(gt.size()));
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    sum += (pred[t] - gt[t]).squaredNorm();
  }
  return sum / static_cast<double>(pred.size());
}

VarietyLoss loss_variety(const std::vector<Track> & preds, const Track & gt)
{
  if (preds.empty()) {
    throw UsageError("loss_variety needs at least one sample");
  }
  VarietyLoss best{loss_l2(preds.front(), gt), 0};
  for (std::size_t i = 1; i < preds.size(); ++i) {
    const double l = loss_l2(preds[i], gt);
    if (l < best.value) {
      best = {l, i};
    }
  }
  return best;
}

double window_loss(Model & m, const MaskedTrajectory & traj, std::size_t samples, Rng & noise_rng)
{
  Tape tape(m.params());
  const TapeEncoding enc = encode(m, tape, traj);
  const std::size_t steps = traj.future.size();
  std::vector<std::vector<Tape::Node>> nodes;
  std::vector<Track> tracks;
  for (std::size_t i = 0; i < samples; ++i) {
    Vec noise = Vec::Zero(m.config().noise_dim);
    if (samples > 1) {
      for (Eigen::Index j = 0; j < noise.size(); ++j) {
        noise[j] = noise_rng.normal();
      }
    }
    nodes.push_back(decode(m, tape, enc.h, steps, noise));
    Track track;
    for (const auto n : nodes.back()) {
      track.push_back(tape.value(n));
    }
    tracks.push_back(std::move(track));
  }
  const VarietyLoss loss = loss_variety(tracks, traj.future);
  const double scale = 2.0 / static_cast<double>(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    tape.add_grad(nodes[loss.best][t], scale * (tracks[loss.best][t] - traj.future[t]));
  }
  tape.backward(m.params());
  return loss.value;
}

namespace
{

void shuffle(std::vector<std::size_t> & v, Rng & rng)
{
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(i))]);
  }
}

}  // namespace

TrainResult train(Model & m, const std::vector<MaskedTrajectory> & windows, const TrainConfig & cfg)
{
  TrainResult result;
  if (cfg.epochs == 0) {
    return result;
  }
  if (windows.empty()) {
    throw DataError("no training windows");
  }
  if (cfg.batch == 0 || cfg.samples == 0) {
    throw UsageError("batch size and sample count must be positive");
  }
  std::vector<MaskedTrajectory> normalized;
  normalized.reserve(windows.size());
  for (const auto & w : windows) {
    if (w.obs_len() != m.config().obs_len || w.future.empty()) {
      throw DataError("training window does not match the model's observation length");
    }
    normalized.push_back(m.norm().apply(w));
  }

  const Rng root(cfg.seed);
  Rng order_rng = root.fork("train-order");
  Rng noise_rng = root.fork("train-noise");
  auto draw_masks = [&](Rng rng) {
    std::vector<MaskedTrajectory> masked;
    masked.reserve(normalized.size());
    for (const auto & w : normalized) {
      const MaskDraw d = gen_mask(w.obs_len(), rng, cfg.miss_ratio);
      result.mask_regenerations += d.regenerated ? 1 : 0;
      masked.push_back(apply_mask(w, d.observed));
    }
    return masked;
  };
  std::vector<MaskedTrajectory> masked = draw_masks(root.fork("train-masks"));

  AdamState adam(m.params(), cfg.adam);
  std::vector<std::size_t> order(masked.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.resample_masks && epoch > 0) {
      masked = draw_masks(root.fork("train-masks-" + std::to_string(epoch)));
    }
    shuffle(order, order_rng);
    double epoch_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch);
      m.params().zero_grad();
      double batch_sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        batch_sum += window_loss(m, masked[order[i]], cfg.samples, noise_rng);
      }
      if (!std::isfinite(batch_sum)) {
        throw TrainingError(
          "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
          std::to_string(begin / cfg.batch));
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      double norm_sq = 0.0;
      for (auto & t : m.params()) {
        t.grad *= inv;
        norm_sq += t.grad.squaredNorm();
      }
      if (cfg.clip_norm > 0.0 && norm_sq > cfg.clip_norm * cfg.clip_norm) {
        const double s = cfg.clip_norm / std::sqrt(norm_sq);
        for (auto & t : m.params()) {
          t.grad *= s;
        }
      }
      adam_step(m.params(), adam);
      epoch_sum += batch_sum;
    }
    result.loss_curve.push_back(epoch_sum / static_cast<double>(order.size()));
  }
  return result;
}

void save_model(const std::filesystem::path & path, const Model & m)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write model file " + path.string());
  }
  const auto & c = m.config();
  char buf[128];
  out << "twoblock-model 1\n";
  out << "kind " << to_string(c.kind) << '\n';
  out << "obs_len " << c.obs_len << '\n';
  out << "encoder_hidden " << c.encoder_hidden << '\n';
  out << "decoder_hidden " << c.decoder_hidden << '\n';
  out << "noise_dim " << c.noise_dim << '\n';
  out << "readout_hidden " << c.readout_hidden << '\n';
  out << "zero_fill_raw " << (c.zero_fill_raw ? 1 : 0) << '\n';
  out << "held_out " << (c.held_out_scene.empty() ? "-" : c.held_out_scene) << '\n';
  std::snprintf(buf, sizeof(buf), "norm %.17g %.17g %.17g %.17g\n", m.norm().mean.x(),
                m.norm().mean.y(), m.norm().std.x(), m.norm().std.y());
  out << buf;
  out << "norm_source " << (m.norm().source.empty() ? "-" : m.norm().source) << '\n';
  out << "fingerprint " << c.fingerprint() << '\n';
  write_tensors(out, m.params());
  if (!out) {
    throw IoError("failed writing model file " + path.string());
  }
}

Model load_model(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open model file " + path.string());
  }
  const std::string source = path.string();
  auto expect = [&](const char * key) {
    std::string k;
    if (!(in >> k) || k != key) {
      throw ParseError(source, 0, std::string("expected '") + key + "'");
    }
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "twoblock-model") {
    throw ParseError(source, 1, "not a twoblock model file");
  }
  if (version != 1) {
    throw CompatibilityError(source + ": unsupported model file version " + std::to_string(version));
  }
  ModelConfig c;
  std::string tag;
  expect("kind");
  in >> tag;
  c.kind = parse_model_kind(tag);
  int zero_raw = 0;
  expect("obs_len");
  in >> c.obs_len;
  expect("encoder_hidden");
  in >> c.encoder_hidden;
  expect("decoder_hidden");
  in >> c.decoder_hidden;
  expect("noise_dim");
  in >> c.noise_dim;
  expect("readout_hidden");
  in >> c.readout_hidden;
  expect("zero_fill_raw");
  in >> zero_raw;
  c.zero_fill_raw = zero_raw != 0;
  expect("held_out");
  in >> c.held_out_scene;
  if (c.held_out_scene == "-") {
    c.held_out_scene.clear();
  }
  NormStats norm;
  expect("norm");
  in >> norm.mean.x() >> norm.mean.y() >> norm.std.x() >> norm.std.y();
  expect("norm_source");
  in >> norm.source;
  if (norm.source == "-") {
    norm.source.clear();
  }
  std::string fingerprint;
  expect("fingerprint");
  in >> fingerprint;
  if (!in) {
    throw ParseError(source, 0, "truncated model header");
  }
  if (fingerprint != c.fingerprint()) {
    throw CompatibilityError(source + ": fingerprint does not match the stored configuration");
  }
  Model m(c, norm, 0);
  read_tensors(in, m.params(), source);
  return m;
}

}  // namespace twoblock
