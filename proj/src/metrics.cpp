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

#include "twoblock/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "twoblock/error.hpp"

namespace twoblock
{

namespace
{

void check_tracks(const Track & pred, const Track & gt, const char * what)
{
  if (pred.size() != gt.size() || pred.empty()) {
    throw ShapeError(
      std::string(what) + ": prediction has " + std::to_string(pred.size()) +
      " steps, ground truth " + std::to_string(gt.size()));
  }
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

double ade(const Track & pred, const Track & gt)
{
  check_tracks(pred, gt, "ade");
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    sum += (pred[t] - gt[t]).norm();
  }
  return sum / static_cast<double>(pred.size());
}

double fde(const Track & pred, const Track & gt)
{
  check_tracks(pred, gt, "fde");
  return (pred.back() - gt.back()).norm();
}

std::vector<double> de_per_step(const Track & pred, const Track & gt)
{
  check_tracks(pred, gt, "de_per_step");
  std::vector<double> de(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    de[t] = (pred[t] - gt[t]).norm();
  }
  return de;
}

std::string to_string(Aggregation agg) { return agg == Aggregation::kBest ? "best" : "mean"; }

Aggregation parse_aggregation(std::string_view tag)
{
  if (tag == "best") {
    return Aggregation::kBest;
  }
  if (tag == "mean") {
    return Aggregation::kMean;
  }
  throw UsageError("unknown aggregation '" + std::string(tag) + "' (valid: best, mean)");
}

std::string format_ratio(const std::optional<double> & ratio)
{
  if (!ratio) {
    return "uniform";
  }
  char buf[32];
  const double tenths = *ratio * 10.0;
  if (std::abs(tenths - std::round(tenths)) < 1e-9) {
    std::snprintf(buf, sizeof(buf), "%.1f", *ratio);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", *ratio);
  }
  return buf;
}

std::vector<MaskDraw> eval_masks(
  const std::vector<MaskedTrajectory> & windows, std::uint64_t seed, std::optional<double> ratio)
{
  Rng rng = Rng(seed).fork("eval-masks");
  std::vector<MaskDraw> masks;
  masks.reserve(windows.size());
  for (const auto & w : windows) {
    masks.push_back(gen_mask(w.obs_len(), rng, ratio));
  }
  return masks;
}

EvalRecord evaluate(
  const Model & m, const std::vector<MaskedTrajectory> & windows,
  const std::vector<MaskDraw> & masks, const EvalOptions & options, const std::string & scene)
{
  if (masks.size() != windows.size()) {
    throw ShapeError("evaluate: one mask per window required");
  }
  if (windows.empty()) {
    throw DataError("no evaluation windows for scene '" + scene + "'");
  }
  if (options.samples == 0) {
    throw UsageError("evaluate needs at least one sample");
  }
  EvalRecord rec;
  rec.model = to_string(m.config().kind);
  rec.scene = scene;
  rec.obs_len = windows.front().obs_len();
  rec.pred_len = windows.front().future.size();
  rec.miss_ratio = options.miss_ratio;
  rec.agg = options.agg;
  rec.seed = options.seed;
  rec.de_m.assign(rec.pred_len, 0.0);

  const bool imputes = m.config().kind != ModelKind::kTwoBlock;
  Rng noise_rng = Rng(options.seed).fork("eval-noise");
  double fill_total = 0.0;
  double encode_total = 0.0;
  double predict_total = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto & w = windows[i];
    if (w.future.size() != rec.pred_len || w.obs_len() != rec.obs_len) {
      throw DataError("evaluation windows must share observation and prediction lengths");
    }
    rec.mask_regenerations += masks[i].regenerated ? 1 : 0;
    const MaskedTrajectory traj = m.norm().apply(apply_mask(w, masks[i].observed));

    Tape tape(m.params());
    TapeEncoding enc;
    if (imputes) {
      auto t0 = Clock::now();
      const Track filled = fill_for(m, traj);
      fill_total += ms_since(t0);
      t0 = Clock::now();
      enc = encode_filled(m, tape, filled);
      encode_total += ms_since(t0);
    } else {
      const auto t0 = Clock::now();
      enc = encode_twoblock(m, tape, traj);
      encode_total += ms_since(t0);
    }
    rec.gap_steps += enc.gap_steps;

    const auto t0 = Clock::now();
    const LstmState state{tape.value(enc.h), tape.value(enc.c)};
    const PredictionSet preds = decode(m, state, rec.pred_len, options.samples, &noise_rng);
    predict_total += ms_since(t0);

    Track chosen;
    if (options.agg == Aggregation::kMean) {
      chosen.assign(rec.pred_len, Point::Zero());
      for (const auto & s : preds.samples) {
        for (std::size_t t = 0; t < rec.pred_len; ++t) {
          chosen[t] += s[t] / static_cast<double>(preds.samples.size());
        }
      }
    } else {
      double best = ade(preds.samples.front(), w.future);
      chosen = preds.samples.front();
      for (std::size_t k = 1; k < preds.samples.size(); ++k) {
        const double a = ade(preds.samples[k], w.future);
        if (a < best) {
          best = a;
          chosen = preds.samples[k];
        }
      }
    }
    const auto de = de_per_step(chosen, w.future);
    for (std::size_t t = 0; t < de.size(); ++t) {
      rec.de_m[t] += de[t];
    }
    rec.ade_m += ade(chosen, w.future);
    rec.fde_m += fde(chosen, w.future);
  }
  const double n = static_cast<double>(windows.size());
  rec.n_windows = windows.size();
  rec.ade_m /= n;
  rec.fde_m /= n;
  for (auto & d : rec.de_m) {
    d /= n;
  }
  if (imputes) {
    rec.fill_ms = fill_total / n;
  }
  rec.encode_ms = encode_total / n;
  rec.predict_ms = predict_total / n;
  return rec;
}

EvalRecord evaluate(
  const Model & m, const std::vector<MaskedTrajectory> & windows, const EvalOptions & options,
  const std::string & scene)
{
  return evaluate(m, windows, eval_masks(windows, options.seed, options.miss_ratio), options,
                  scene);
}

void write_metrics_csv(
  std::ostream & out, const std::vector<EvalRecord> & records, bool with_timing)
{
  out << kMetricsHeader << '\n';
  char buf[256];
  for (const auto & r : records) {
    std::snprintf(
      buf, sizeof(buf), "%s,%s,%zu,%zu,%s,%s,%.6f,%.6f,%zu,%llu,", r.model.c_str(),
      r.scene.c_str(), r.obs_len, r.pred_len, format_ratio(r.miss_ratio).c_str(),
      to_string(r.agg).c_str(), r.ade_m, r.fde_m, r.n_windows,
      static_cast<unsigned long long>(r.seed));
    out << buf;
    if (with_timing) {
      if (r.fill_ms) {
        std::snprintf(buf, sizeof(buf), "%.6g", *r.fill_ms);
        out << buf;
      }
      std::snprintf(buf, sizeof(buf), ",%.6g,%.6g", r.encode_ms, r.predict_ms);
      out << buf;
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void write_de_csv(std::ostream & out, const std::vector<EvalRecord> & records)
{
  out << kDeHeader << '\n';
  char buf[160];
  for (const auto & r : records) {
    for (std::size_t t = 0; t < r.de_m.size(); ++t) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%s,%zu,%.6f\n", r.model.c_str(), r.scene.c_str(),
                    format_ratio(r.miss_ratio).c_str(), t + 1, r.de_m[t]);
      out << buf;
    }
  }
}

}  // namespace twoblock
