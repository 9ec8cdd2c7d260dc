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

#include "twoblock/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "twoblock/datasets.hpp"
#include "twoblock/error.hpp"
#include "twoblock/svg.hpp"

#ifndef TWOBLOCK_VERSION
#define TWOBLOCK_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace twoblock
{

std::string build_version() { return TWOBLOCK_VERSION; }

void RunConfig::validate() const
{
  parse_model_kind(model);
  parse_aggregation(agg);
  fixed_ratio();
  if (obs_len < 2) {
    throw UsageError("--obs-len must be at least 2");
  }
  if (pred_len < 1) {
    throw UsageError("--pred-len must be at least 1");
  }
  if (hidden < 1 || block_hidden < 1) {
    throw UsageError("--hidden and --block-hidden must be positive");
  }
  if (samples < 1) {
    throw UsageError("--samples must be at least 1");
  }
  if (batch < 1) {
    throw UsageError("--batch must be at least 1");
  }
  if (!(lr > 0.0)) {
    throw UsageError("--lr must be positive");
  }
  if (stride < 1 || eval_stride < 1) {
    throw UsageError("--stride and --eval-stride must be at least 1");
  }
  for (auto h : horizons) {
    if (h < 1) {
      throw UsageError("--horizons entries must be positive");
    }
  }
  if (test_scene.empty()) {
    throw UsageError("--test-scene must not be empty");
  }
}

std::optional<double> RunConfig::fixed_ratio() const
{
  if (miss_ratio == "uniform") {
    return std::nullopt;
  }
  char * end = nullptr;
  const double r = std::strtod(miss_ratio.c_str(), &end);
  if (end == miss_ratio.c_str() || *end != '\0' || !(r >= 0.0 && r <= 1.0)) {
    throw UsageError("--miss-ratio must be 'uniform' or a number in [0, 1], got '" + miss_ratio + "'");
  }
  return r;
}

ModelConfig RunConfig::model_config(ModelKind kind) const
{
  ModelConfig c = ModelConfig::defaults(kind);
  c.encoder_hidden = static_cast<Eigen::Index>(kind == ModelKind::kTwoBlock ? block_hidden : hidden);
  c.obs_len = obs_len;
  c.zero_fill_raw = zero_fill_raw;
  std::string scene = test_scene;
  std::transform(scene.begin(), scene.end(), scene.begin(), [](unsigned char ch) {
    return std::tolower(ch);
  });
  c.held_out_scene = scene;
  return c;
}

std::string RunConfig::manifest() const
{
  std::ostringstream m;
  m << "command = " << command << '\n'
    << "version = " << build_version() << '\n'
    << "data-dir = " << data_dir.string() << '\n'
    << "test-scene = " << test_scene << '\n'
    << "obs-len = " << obs_len << '\n'
    << "pred-len = " << pred_len << '\n'
    << "model = " << model << '\n'
    << "hidden = " << hidden << '\n'
    << "block-hidden = " << block_hidden << '\n'
    << "samples = " << samples << '\n'
    << "agg = " << agg << '\n'
    << "epochs = " << epochs << '\n'
    << "batch = " << batch << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", lr);
  m << "lr = " << buf << '\n'
    << "seed = " << (seed ? std::to_string(*seed) : std::string("none")) << '\n'
    << "miss-ratio = " << miss_ratio << '\n'
    << "horizons = ";
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    m << (i ? "," : "") << horizons[i];
  }
  m << '\n'
    << "out-dir = " << out_dir.string() << '\n'
    << "config = " << config_file << '\n'
    << "stride = " << stride << '\n'
    << "eval-stride = " << eval_stride << '\n'
    << "resample-masks = " << (resample_masks ? "true" : "false") << '\n'
    << "zero-fill-raw = " << (zero_fill_raw ? "true" : "false") << '\n'
    << "with-timing = " << (with_timing ? "true" : "false") << '\n'
    << "bench-reps = " << bench_reps << '\n';
  return m.str();
}

fs::path weights_path(const RunConfig & cfg, const std::string & model)
{
  return cfg.out_dir / (to_string(parse_model_kind(model)) + ".weights");
}

namespace
{

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::uint64_t require_seed(const RunConfig & cfg)
{
  if (!cfg.seed) {
    throw UsageError("--seed is required for " + cfg.command);
  }
  return *cfg.seed;
}

struct Split
{
  std::vector<SceneTable> train;
  std::vector<SceneTable> test;
  std::vector<std::string> train_scenes;
};

Split load_split(const RunConfig & cfg, bool need_train)
{
  const auto scenes = list_scenes(cfg.data_dir);
  const std::string test = lower(cfg.test_scene);
  if (std::find(scenes.begin(), scenes.end(), test) == scenes.end()) {
    throw IoError("test scene '" + test + "' not found under " + cfg.data_dir.string());
  }
  Split split;
  split.test = load_scene_set(cfg.data_dir, test);
  if (need_train) {
    for (const auto & s : scenes) {
      if (s == test) {
        continue;
      }
      split.train_scenes.push_back(s);
      for (auto & t : load_scene_set(cfg.data_dir, s)) {
        split.train.push_back(std::move(t));
      }
    }
    if (split.train.empty()) {
      throw DataError("no training scenes besides '" + test + "' under " + cfg.data_dir.string());
    }
  }
  return split;
}

std::vector<MaskedTrajectory> windows_of(
  const std::vector<SceneTable> & tables, std::size_t obs, std::size_t pred, std::size_t stride)
{
  WindowSpec spec;
  spec.obs_len = obs;
  spec.pred_len = pred;
  spec.stride = stride;
  std::vector<MaskedTrajectory> out;
  for (const auto & t : tables) {
    auto w = make_windows(t, spec);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

Model load_checked(const RunConfig & cfg, const std::string & tag)
{
  const fs::path path = weights_path(cfg, tag);
  Model m = load_model(path);
  const ModelConfig expected = cfg.model_config(parse_model_kind(tag));
  if (m.config().fingerprint() != expected.fingerprint()) {
    throw CompatibilityError(
      path.string() + " was trained with a different configuration (fingerprint " +
      m.config().fingerprint() + ", requested " + expected.fingerprint() + ")");
  }
  return m;
}

void ensure_dir(const fs::path & dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

template <typename Writer>
void write_file(const fs::path & path, Writer && writer)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  writer(out);
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

EvalOptions eval_options(const RunConfig & cfg, std::optional<double> ratio)
{
  EvalOptions o;
  o.samples = cfg.samples;
  o.agg = parse_aggregation(cfg.agg);
  o.miss_ratio = ratio;
  o.seed = *cfg.seed;
  return o;
}

}  // namespace

TrainArtifacts cmd_train(const RunConfig & cfg)
{
  cfg.validate();
  const std::uint64_t seed = require_seed(cfg);
  const ModelKind kind = parse_model_kind(cfg.model);
  const Split split = load_split(cfg, true);
  const NormStats norm = fit_norm(split.train);
  const auto windows = windows_of(split.train, cfg.obs_len, cfg.pred_len, cfg.stride);
  if (windows.empty()) {
    throw DataError("training scenes yield no complete windows");
  }

  Model m(cfg.model_config(kind), norm, Rng(seed).fork("init").next_u64());
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch = cfg.batch;
  tc.adam.lr = cfg.lr;
  tc.samples = cfg.samples;
  tc.miss_ratio = cfg.fixed_ratio();
  tc.resample_masks = cfg.resample_masks;
  tc.seed = seed;
  const TrainResult result = train(m, windows, tc);

  ensure_dir(cfg.out_dir);
  TrainArtifacts art;
  const std::string tag = to_string(kind);
  art.weights = weights_path(cfg, tag);
  art.manifest = cfg.out_dir / (tag + ".manifest");
  art.loss_curve = cfg.out_dir / (tag + "_loss.csv");
  art.losses = result.loss_curve;
  save_model(art.weights, m);

  std::string manifest = cfg.manifest();
  manifest += "train-scenes = ";
  for (std::size_t i = 0; i < split.train_scenes.size(); ++i) {
    manifest += (i ? "," : "") + split.train_scenes[i];
  }
  manifest += "\ntrain-windows = " + std::to_string(windows.size()) + "\n";
  manifest += "mask-regenerations = " + std::to_string(result.mask_regenerations) + "\n";
  manifest += "fingerprint = " + m.config().fingerprint() + "\n";
  write_text(art.manifest, manifest);

  write_file(art.loss_curve, [&](std::ostream & out) {
    out << "epoch,loss\n";
    char buf[64];
    for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e + 1, result.loss_curve[e]);
      out << buf;
    }
  });
  return art;
}

EvalArtifacts cmd_eval(const RunConfig & cfg)
{
  cfg.validate();
  require_seed(cfg);
  const Model m = load_checked(cfg, cfg.model);
  const Split split = load_split(cfg, false);
  const auto windows = windows_of(split.test, cfg.obs_len, cfg.pred_len, cfg.eval_stride);

  EvalArtifacts art;
  art.record = evaluate(m, windows, eval_options(cfg, cfg.fixed_ratio()), lower(cfg.test_scene));
  const fs::path dir = cfg.out_dir / ("eval_" + to_string(m.config().kind));
  ensure_dir(dir);
  art.metrics_csv = dir / "metrics.csv";
  art.de_csv = dir / "de_per_step.csv";
  write_file(art.metrics_csv, [&](std::ostream & out) {
    write_metrics_csv(out, {art.record}, cfg.with_timing);
  });
  write_file(art.de_csv, [&](std::ostream & out) { write_de_csv(out, {art.record}); });
  return art;
}

SweepArtifacts cmd_sweep(const RunConfig & cfg)
{
  cfg.validate();
  require_seed(cfg);
  std::vector<Model> models;
  for (const char * tag : kModelTags) {
    models.push_back(load_checked(cfg, tag));
  }
  const Split split = load_split(cfg, false);
  const std::string scene = lower(cfg.test_scene);
  const auto windows = windows_of(split.test, cfg.obs_len, cfg.pred_len, cfg.eval_stride);

  SweepArtifacts art;
  art.dir = cfg.out_dir / "sweep";
  ensure_dir(art.dir);
  for (const auto & m : models) {
    for (double r : kRatioGrid) {
      const EvalOptions o = eval_options(cfg, r);
      art.grid.push_back(evaluate(m, windows, o, scene));
    }
    art.uniform.push_back(evaluate(m, windows, eval_options(cfg, std::nullopt), scene));
  }
  write_file(art.dir / "metrics.csv", [&](std::ostream & out) {
    write_metrics_csv(out, art.grid, cfg.with_timing);
  });
  write_file(art.dir / "de_per_step.csv", [&](std::ostream & out) { write_de_csv(out, art.grid); });
  write_file(art.dir / "uniform_metrics.csv", [&](std::ostream & out) {
    write_metrics_csv(out, art.uniform, cfg.with_timing);
  });
  write_file(art.dir / "uniform_de_per_step.csv", [&](std::ostream & out) {
    write_de_csv(out, art.uniform);
  });
  for (auto h : cfg.horizons) {
    const auto hw = windows_of(split.test, cfg.obs_len, h, cfg.eval_stride);
    if (hw.empty()) {
      throw DataError("no test windows long enough for horizon " + std::to_string(h));
    }
    std::vector<EvalRecord> rows;
    for (const auto & m : models) {
      rows.push_back(evaluate(m, hw, eval_options(cfg, std::nullopt), scene));
    }
    write_file(art.dir / ("horizon_" + std::to_string(h) + "_de_per_step.csv"),
               [&](std::ostream & out) { write_de_csv(out, rows); });
    art.horizons.insert(art.horizons.end(), rows.begin(), rows.end());
  }

  if (!art.horizons.empty()) {
    write_file(art.dir / "horizons.csv", [&](std::ostream & out) {
      write_metrics_csv(out, art.horizons, cfg.with_timing);
    });
  }

  std::vector<Series> ade_series;
  std::vector<Series> fde_series;
  std::vector<Series> de_series;
  for (const auto & m : models) {
    const std::string tag = to_string(m.config().kind);
    Series a{tag, {}, {}};
    Series f{tag, {}, {}};
    for (const auto & r : art.grid) {
      if (r.model == tag) {
        a.x.push_back(*r.miss_ratio);
        a.y.push_back(r.ade_m);
        f.x.push_back(*r.miss_ratio);
        f.y.push_back(r.fde_m);
      }
    }
    ade_series.push_back(std::move(a));
    fde_series.push_back(std::move(f));
    for (const auto & r : art.uniform) {
      if (r.model == tag) {
        Series d{tag, {}, r.de_m};
        for (std::size_t t = 0; t < r.de_m.size(); ++t) {
          d.x.push_back(static_cast<double>(t + 1));
        }
        de_series.push_back(std::move(d));
      }
    }
  }
  const std::string where = " (" + scene + ", " + std::to_string(cfg.pred_len) + " steps)";
  write_text(art.dir / "ratio_ade.svg",
             line_chart("ADE vs miss-detection ratio" + where, "miss-detection ratio", "ADE (m)",
                        ade_series));
  write_text(art.dir / "ratio_fde.svg",
             line_chart("FDE vs miss-detection ratio" + where, "miss-detection ratio", "FDE (m)",
                        fde_series));
  write_text(art.dir / "de_per_step.svg",
             line_chart("Displacement error per step" + where, "prediction step", "DE (m)",
                        de_series));
  if (!art.horizons.empty()) {
    std::vector<Series> hs;
    for (const auto & m : models) {
      const std::string tag = to_string(m.config().kind);
      Series s{tag, {}, {}};
      for (const auto & r : art.horizons) {
        if (r.model == tag) {
          s.x.push_back(static_cast<double>(r.pred_len));
          s.y.push_back(r.ade_m);
        }
      }
      hs.push_back(std::move(s));
    }
    write_text(art.dir / "horizon_ade.svg",
               line_chart("ADE vs prediction length (" + scene + ")", "prediction length",
                          "ADE (m)", hs));
  }
  return art;
}

BenchArtifacts cmd_bench(const RunConfig & cfg)
{
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  const std::uint64_t seed = require_seed(cfg);
  const Split split = load_split(cfg, false);
  const auto windows = windows_of(split.test, cfg.obs_len, cfg.pred_len, cfg.eval_stride);
  if (windows.empty()) {
    throw DataError("test scene yields no complete windows");
  }
  const auto masks = eval_masks(windows, seed, cfg.fixed_ratio());
  const std::size_t reps = std::max<std::size_t>(cfg.bench_reps, 1);

  BenchArtifacts art;
  for (const char * tag : kModelTags) {
    if (!fs::exists(weights_path(cfg, tag))) {
      continue;
    }
    const Model m = load_checked(cfg, tag);
    const bool imputes = m.config().kind != ModelKind::kTwoBlock;
    std::vector<MaskedTrajectory> inputs;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      inputs.push_back(m.norm().apply(apply_mask(windows[i], masks[i].observed)));
    }
    Rng noise_rng = Rng(seed).fork("bench-noise");
    std::vector<double> fill;
    std::vector<double> enc;
    std::vector<double> pred;
    std::vector<double> total;
    for (std::size_t i = 0; i < reps; ++i) {
      const auto & traj = inputs[i % inputs.size()];
      Tape tape(m.params());
      TapeEncoding e;
      double f_ms = 0.0;
      auto t0 = Clock::now();
      if (imputes) {
        const Track filled = fill_for(m, traj);
        f_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        t0 = Clock::now();
        e = encode_filled(m, tape, filled);
      } else {
        e = encode_twoblock(m, tape, traj);
      }
      const double e_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      t0 = Clock::now();
      const LstmState state{tape.value(e.h), tape.value(e.c)};
      const PredictionSet p = decode(m, state, cfg.pred_len, cfg.samples, &noise_rng);
      const double p_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      if (p.samples.empty()) {
        throw DataError("bench produced no prediction");
      }
      fill.push_back(f_ms);
      enc.push_back(e_ms);
      pred.push_back(p_ms);
      total.push_back(f_ms + e_ms + p_ms);
    }
    auto stats = [](const std::vector<double> & v) {
      double mean = 0.0;
      for (double x : v) {
        mean += x;
      }
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) {
        var += (x - mean) * (x - mean);
      }
      var /= static_cast<double>(v.size() > 1 ? v.size() - 1 : 1);
      return std::make_pair(mean, std::sqrt(var));
    };
    PhaseTiming row;
    row.model = tag;
    row.reps = reps;
    if (imputes) {
      std::tie(row.fill_mean_ms, row.fill_std_ms) = stats(fill);
    }
    std::tie(row.encode_mean_ms, row.encode_std_ms) = stats(enc);
    std::tie(row.predict_mean_ms, row.predict_std_ms) = stats(pred);
    std::tie(row.total_mean_ms, row.total_std_ms) = stats(total);
    art.rows.push_back(row);
  }
  if (art.rows.empty()) {
    throw IoError("no trained model files under " + cfg.out_dir.string());
  }

  const fs::path dir = cfg.out_dir / "bench";
  ensure_dir(dir);
  art.timing_csv = dir / "timing.csv";
  write_file(art.timing_csv, [&](std::ostream & out) {
    out << kTimingHeader << '\n';
    char buf[256];
    for (const auto & r : art.rows) {
      out << r.model << ',';
      if (r.fill_mean_ms) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g", *r.fill_mean_ms, *r.fill_std_ms);
        out << buf;
      } else {
        out << ',';
      }
      std::snprintf(buf, sizeof(buf), ",%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%zu\n", r.encode_mean_ms,
                    r.encode_std_ms, r.predict_mean_ms, r.predict_std_ms, r.total_mean_ms,
                    r.total_std_ms, r.reps);
      out << buf;
    }
  });
  return art;
}

fs::path cmd_report(const RunConfig & cfg)
{
  if (!fs::is_directory(cfg.out_dir)) {
    throw IoError("output directory not found: " + cfg.out_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto & e : fs::recursive_directory_iterator(cfg.out_dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() &&
        (name == "metrics.csv" || name == "uniform_metrics.csv" || name == "horizons.csv" ||
         name == "timing.csv")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::ostringstream md;
  md << "# Run report\n\n";
  bool any_model = false;
  for (const char * tag : kModelTags) {
    const fs::path curve = cfg.out_dir / (std::string(tag) + "_loss.csv");
    std::ifstream in(curve);
    if (!in) {
      continue;
    }
    if (!any_model) {
      md << "## Trained models\n\n| model | epochs | final loss |\n| --- | --- | --- |\n";
      any_model = true;
    }
    std::string line;
    std::string last;
    std::size_t epochs = 0;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (!line.empty()) {
        last = line;
        ++epochs;
      }
    }
    const auto comma = last.find(',');
    md << "| " << tag << " | " << epochs << " | "
       << (comma == std::string::npos ? "-" : last.substr(comma + 1)) << " |\n";
  }
  if (any_model) {
    md << '\n';
  }
  for (const auto & f : files) {
    std::ifstream in(f);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) {
        cells.push_back(cell);
      }
      if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
      }
      rows.push_back(std::move(cells));
    }
    if (rows.empty()) {
      continue;
    }
    md << "## " << fs::relative(f, cfg.out_dir).string() << "\n\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      md << '|';
      for (const auto & c : rows[r]) {
        md << ' ' << (c.empty() ? "-" : c) << " |";
      }
      md << '\n';
      if (r == 0) {
        md << '|';
        for (std::size_t c = 0; c < rows[0].size(); ++c) {
          md << " --- |";
        }
        md << '\n';
      }
    }
    md << '\n';
  }
  const fs::path path = cfg.out_dir / "report.md";
  write_text(path, md.str());
  return path;
}

int run_cli(int argc, char ** argv)
{
  CLI::App app{"Two-block RNN trajectory forecasting from incomplete observations"};
  app.set_config("--config", "", "Flat `key = value` file; command-line flags take precedence");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string data_dir = cfg.data_dir.string();
  std::string out_dir = cfg.out_dir.string();
  app.add_option("--data-dir", data_dir, "Directory of scene files")->capture_default_str();
  app.add_option("--test-scene", cfg.test_scene, "Held-out scene")->capture_default_str();
  app.add_option("--obs-len", cfg.obs_len, "Observed steps")->capture_default_str();
  app.add_option("--pred-len", cfg.pred_len, "Predicted steps")->capture_default_str();
  app.add_option("--model", cfg.model, "twoblock | last | zero | linear")->capture_default_str();
  app.add_option("--hidden", cfg.hidden, "Baseline encoder width")->capture_default_str();
  app.add_option("--block-hidden", cfg.block_hidden, "Two-block per-block width")
    ->capture_default_str();
  app.add_option("--samples", cfg.samples, "Samples k per trajectory")->capture_default_str();
  app.add_option("--agg", cfg.agg, "Multi-sample aggregation")
    ->check(CLI::IsMember({"best", "mean"}))
    ->capture_default_str();
  app.add_option("--epochs", cfg.epochs)->capture_default_str();
  app.add_option("--batch", cfg.batch)->capture_default_str();
  app.add_option("--lr", cfg.lr)->capture_default_str();
  app.add_option("--seed", cfg.seed, "Run seed (required for train/eval/sweep/bench)");
  app.add_option("--miss-ratio", cfg.miss_ratio, "uniform or a fixed ratio in [0, 1]")
    ->capture_default_str();
  app.add_option("--horizons", cfg.horizons, "Extra decode lengths, e.g. 12,16,20")
    ->delimiter(',');
  app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  app.add_option("--stride", cfg.stride, "Training window stride")->capture_default_str();
  app.add_option("--eval-stride", cfg.eval_stride, "Evaluation window stride")
    ->capture_default_str();
  app.add_flag("--resample-masks", cfg.resample_masks, "Draw new training masks every epoch");
  app.add_flag("--zero-fill-raw", cfg.zero_fill_raw, "Zero filling in meters, not normalized");
  app.add_flag("--with-timing", cfg.with_timing, "Fill timing columns of metrics CSVs");
  app.add_option("--bench-reps", cfg.bench_reps, "Timed repetitions for bench")
    ->capture_default_str();

  for (const char * name : {"train", "eval", "sweep", "bench", "report"}) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    std::cerr << "usage error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kUsage);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.data_dir = data_dir;
  cfg.out_dir = out_dir;
  if (auto * opt = app.get_config_ptr(); opt != nullptr && opt->count() > 0) {
    cfg.config_file = opt->as<std::string>();
  }

  try {
    if (cfg.command == "train") {
      const auto art = cmd_train(cfg);
      std::cout << "wrote " << art.weights.string() << " (final loss "
                << (art.losses.empty() ? 0.0 : art.losses.back()) << ")\n";
    } else if (cfg.command == "eval") {
      const auto art = cmd_eval(cfg);
      std::printf("%s %s ADE %.4f m FDE %.4f m over %zu windows (g_i steps %zu)\n",
                  art.record.model.c_str(), art.record.scene.c_str(), art.record.ade_m,
                  art.record.fde_m, art.record.n_windows, art.record.gap_steps);
    } else if (cfg.command == "sweep") {
      const auto art = cmd_sweep(cfg);
      std::cout << "wrote " << art.dir.string() << '\n';
    } else if (cfg.command == "bench") {
      const auto art = cmd_bench(cfg);
      std::cout << "wrote " << art.timing_csv.string() << '\n';
    } else {
      std::ifstream in(cmd_report(cfg));
      std::cout << in.rdbuf();
    }
  } catch (const Error & e) {
    std::cerr << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error & e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kNumeric);
  }
  return 0;
}

}  // namespace twoblock
