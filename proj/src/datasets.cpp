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

#include "twoblock/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "twoblock/error.hpp"

namespace fs = std::filesystem;

namespace twoblock
{

namespace
{

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_real(const std::string & token, double & out)
{
  char * end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end != token.c_str() && *end == '\0' && std::isfinite(out);
}

}  // namespace

SceneTable parse_scene(std::istream & in, const std::string & scene, const std::string & source)
{
  SceneTable table{scene, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) {
      tokens.push_back(tok);
    }
    if (tokens.empty() || tokens.front().front() == '#') {
      continue;
    }
    if (tokens.size() != 4) {
      throw ParseError(source, line_no, "expected 4 fields, got " + std::to_string(tokens.size()));
    }
    SceneRow row;
    double * dst[4] = {&row.frame, &row.pedestrian, &row.x, &row.y};
    static const char * names[4] = {"frame_id", "ped_id", "x", "y"};
    for (int k = 0; k < 4; ++k) {
      if (!parse_real(tokens[k], *dst[k])) {
        throw ParseError(source, line_no, std::string("bad ") + names[k] + " '" + tokens[k] + "'");
      }
    }
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const SceneRow & a, const SceneRow & b) {
    return a.frame != b.frame ? a.frame < b.frame : a.pedestrian < b.pedestrian;
  });
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto & a = table.rows[i - 1];
    const auto & b = table.rows[i];
    if (a.frame == b.frame && a.pedestrian == b.pedestrian) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "duplicate row for frame %g, pedestrian %g", a.frame,
                    a.pedestrian);
      throw DataError(source + ": " + buf);
    }
  }
  return table;
}

SceneTable load_scene(const fs::path & path, const std::string & scene)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open scene file " + path.string());
  }
  return parse_scene(in, scene, path.string());
}

void save_scene(const fs::path & path, const SceneTable & table)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write scene file " + path.string());
  }
  char buf[128];
  for (const auto & r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t%.17g\t%.17g\n", r.frame, r.pedestrian, r.x,
                  r.y);
    out << buf;
  }
}

std::vector<std::string> list_scenes(const fs::path & data_dir)
{
  if (!fs::is_directory(data_dir)) {
    throw IoError("data directory not found: " + data_dir.string());
  }
  std::vector<std::string> scenes;
  for (const auto & entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory()) {
      scenes.push_back(lower(entry.path().filename().string()));
    } else if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      scenes.push_back(lower(entry.path().stem().string()));
    }
  }
  std::sort(scenes.begin(), scenes.end());
  scenes.erase(std::unique(scenes.begin(), scenes.end()), scenes.end());
  return scenes;
}

std::vector<SceneTable> load_scene_set(const fs::path & data_dir, const std::string & scene)
{
  const std::string want = lower(scene);
  std::vector<fs::path> files;
  for (const auto & entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory() && lower(entry.path().filename().string()) == want) {
      for (const auto & f : fs::directory_iterator(entry.path())) {
        if (f.is_regular_file() && f.path().extension() == ".txt") {
          files.push_back(f.path());
        }
      }
    } else if (
      entry.is_regular_file() && entry.path().extension() == ".txt" &&
      lower(entry.path().stem().string()) == want) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw IoError("scene '" + scene + "' not found under " + data_dir.string());
  }
  std::sort(files.begin(), files.end());
  std::vector<SceneTable> tables;
  for (const auto & f : files) {
    tables.push_back(load_scene(f, want));
  }
  return tables;
}

void WindowSpec::validate() const
{
  if (obs_len < 2) {
    throw UsageError("observation length must be at least 2");
  }
  if (pred_len < 1) {
    throw UsageError("prediction length must be at least 1");
  }
  if (stride < 1) {
    throw UsageError("window stride must be at least 1");
  }
}

std::vector<MaskedTrajectory> make_windows(const SceneTable & scene, const WindowSpec & spec)
{
  spec.validate();
  std::vector<double> frames;
  for (const auto & r : scene.rows) {
    if (frames.empty() || frames.back() != r.frame) {
      frames.push_back(r.frame);
    }
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  // pedestrian -> (timestep index, position), ascending in time.
  std::map<double, std::vector<std::pair<std::size_t, Point>>> tracks;
  for (const auto & r : scene.rows) {
    const auto idx = static_cast<std::size_t>(
      std::lower_bound(frames.begin(), frames.end(), r.frame) - frames.begin());
    tracks[r.pedestrian].emplace_back(idx, Point(r.x, r.y));
  }

  const std::size_t len = spec.obs_len + spec.pred_len;
  std::vector<MaskedTrajectory> windows;
  for (auto & [ped, samples] : tracks) {
    std::sort(samples.begin(), samples.end(), [](const auto & a, const auto & b) {
      return a.first < b.first;
    });
    std::size_t run_begin = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const bool run_ends = i + 1 == samples.size() || samples[i + 1].first != samples[i].first + 1;
      if (!run_ends) {
        continue;
      }
      const std::size_t first_step = samples[run_begin].first;
      const std::size_t last_step = samples[i].first;
      std::size_t start = (first_step + spec.stride - 1) / spec.stride * spec.stride;
      for (; start + len - 1 <= last_step; start += spec.stride) {
        const std::size_t offset = run_begin + (start - first_step);
        MaskedTrajectory w;
        w.agent_id = std::llround(ped);
        w.scene = scene.scene;
        w.start_frame = frames[start];
        for (std::size_t k = 0; k < spec.obs_len; ++k) {
          w.observations.push_back(samples[offset + k].second);
        }
        w.observed.assign(spec.obs_len, true);
        for (std::size_t k = spec.obs_len; k < len; ++k) {
          w.future.push_back(samples[offset + k].second);
        }
        windows.push_back(std::move(w));
      }
      run_begin = i + 1;
    }
  }
  return windows;
}

MaskDraw gen_mask(std::size_t obs_len, Rng & rng, std::optional<double> ratio)
{
  if (obs_len == 0) {
    throw UsageError("gen_mask: observation length must be positive");
  }
  MaskDraw draw;
  if (ratio) {
    if (!(*ratio >= 0.0 && *ratio <= 1.0)) {
      throw UsageError("miss ratio must lie in [0, 1]");
    }
    draw.ratio = *ratio;
  } else {
    draw.ratio = rng.uniform(0.2, 0.8);
  }
  auto n_miss = static_cast<std::size_t>(std::round(draw.ratio * static_cast<double>(obs_len)));
  if (n_miss >= obs_len) {
    n_miss = obs_len - 1;
    draw.regenerated = true;
  }
  std::vector<std::size_t> order(obs_len);
  for (std::size_t i = 0; i < obs_len; ++i) {
    order[i] = i;
  }
  draw.observed.assign(obs_len, true);
  for (std::size_t i = 0; i < n_miss; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(obs_len - i));
    std::swap(order[i], order[j]);
    draw.observed[order[i]] = false;
  }
  return draw;
}

Track NormStats::apply(const Track & track) const
{
  Track out;
  out.reserve(track.size());
  for (const auto & p : track) {
    out.push_back(apply(p));
  }
  return out;
}

Track NormStats::invert(const Track & track) const
{
  Track out;
  out.reserve(track.size());
  for (const auto & p : track) {
    out.push_back(invert(p));
  }
  return out;
}

MaskedTrajectory NormStats::apply(const MaskedTrajectory & traj) const
{
  MaskedTrajectory out = traj;
  out.observations = apply(traj.observations);
  out.future = apply(traj.future);
  return out;
}

void NormStats::validate() const
{
  if (!(std.x() > 0.0 && std.y() > 0.0) || !mean.allFinite() || !std.allFinite()) {
    throw DataError("normalization std must be positive and finite on both axes");
  }
}

NormStats fit_norm(const std::vector<Point> & positions, const std::string & source)
{
  if (positions.empty()) {
    throw DataError("cannot fit normalization on an empty training set");
  }
  const double n = static_cast<double>(positions.size());
  Point sum = Point::Zero();
  for (const auto & p : positions) {
    sum += p;
  }
  NormStats stats;
  stats.mean = sum / n;
  Point sq = Point::Zero();
  for (const auto & p : positions) {
    sq += (p - stats.mean).cwiseAbs2();
  }
  stats.std = (sq / n).cwiseSqrt();
  stats.source = source;
  if (!(stats.std.x() > 0.0 && stats.std.y() > 0.0)) {
    throw DataError("degenerate axis in training positions (std = 0) from " + source);
  }
  return stats;
}

NormStats fit_norm(const std::vector<SceneTable> & train_scenes)
{
  std::vector<Point> positions;
  std::vector<std::string> names;
  for (const auto & t : train_scenes) {
    for (const auto & r : t.rows) {
      positions.emplace_back(r.x, r.y);
    }
    if (std::find(names.begin(), names.end(), t.scene) == names.end()) {
      names.push_back(t.scene);
    }
  }
  std::string source;
  for (const auto & n : names) {
    source += (source.empty() ? "" : "+") + n;
  }
  return fit_norm(positions, source);
}

namespace
{

struct CvSampler
{
  // Lower-triangular factor of the per-axis process covariance.
  double l11 = 0.0;
  double l21 = 0.0;
  double l22 = 0.0;

  explicit CvSampler(const SyntheticSpec & spec)
  {
    const double dt = spec.step_seconds;
    const double q = spec.process_intensity;
    if (q > 0.0) {
      const double pp = q * dt * dt * dt / 3.0;
      const double pv = q * dt * dt / 2.0;
      const double vv = q * dt;
      l11 = std::sqrt(pp);
      l21 = pv / l11;
      l22 = std::sqrt(std::max(0.0, vv - l21 * l21));
    }
  }

  // Advances (position, velocity) of one axis by one step.
  void step(double & pos, double & vel, double dt, Rng & rng) const
  {
    pos += vel * dt;
    if (l11 > 0.0) {
      const double a = rng.normal();
      const double b = rng.normal();
      pos += l11 * a;
      vel += l21 * a + l22 * b;
    }
  }
};

// Noise-free positions of one track, `len` steps long.
Track cv_truth(const SyntheticSpec & spec, std::size_t len, const CvSampler & sampler, Rng & rng)
{
  Point pos(rng.uniform(-spec.area, spec.area), rng.uniform(-spec.area, spec.area));
  const double speed = rng.uniform(spec.speed_min, spec.speed_max);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Point vel(speed * std::cos(heading), speed * std::sin(heading));
  Track truth;
  truth.reserve(len);
  for (std::size_t t = 0; t < len; ++t) {
    truth.push_back(pos);
    sampler.step(pos.x(), vel.x(), spec.step_seconds, rng);
    sampler.step(pos.y(), vel.y(), spec.step_seconds, rng);
  }
  return truth;
}

}  // namespace

std::vector<MaskedTrajectory> gen_synthetic_cv(const SyntheticSpec & spec, Rng & rng)
{
  if (spec.measurement_std < 0.0 || spec.process_intensity < 0.0) {
    throw UsageError("synthetic noise levels must be non-negative");
  }
  const CvSampler sampler(spec);
  std::vector<MaskedTrajectory> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const Track truth = cv_truth(spec, spec.obs_len + spec.pred_len, sampler, rng);
    MaskedTrajectory traj;
    traj.agent_id = static_cast<std::int64_t>(i + 1);
    traj.scene = "synthetic";
    for (std::size_t t = 0; t < spec.obs_len; ++t) {
      Point z = truth[t];
      if (spec.measurement_std > 0.0) {
        z.x() += spec.measurement_std * rng.normal();
        z.y() += spec.measurement_std * rng.normal();
      }
      traj.observations.push_back(z);
    }
    traj.observed.assign(spec.obs_len, true);
    traj.future.assign(truth.begin() + static_cast<std::ptrdiff_t>(spec.obs_len), truth.end());
    out.push_back(std::move(traj));
  }
  return out;
}

SceneTable synthetic_scene(
  const SyntheticSpec & spec, std::size_t track_len, const std::string & name, Rng & rng)
{
  const CvSampler sampler(spec);
  SceneTable table{name, {}};
  for (std::size_t i = 0; i < spec.count; ++i) {
    const Track truth = cv_truth(spec, track_len, sampler, rng);
    for (std::size_t t = 0; t < track_len; ++t) {
      Point z = truth[t];
      if (spec.measurement_std > 0.0) {
        z.x() += spec.measurement_std * rng.normal();
        z.y() += spec.measurement_std * rng.normal();
      }
      const double frame = 10.0 * static_cast<double>(i + t);
      table.rows.push_back(SceneRow{frame, static_cast<double>(i + 1), z.x(), z.y()});
    }
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const SceneRow & a, const SceneRow & b) {
    return a.frame != b.frame ? a.frame < b.frame : a.pedestrian < b.pedestrian;
  });
  return table;
}

void write_synthetic_dataset(const fs::path & dir, const std::vector<std::string> & names,
                             const SyntheticSpec & spec, std::size_t track_len, std::uint64_t seed)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir.string() + ": " + ec.message());
  }
  const Rng root(seed);
  for (const auto & name : names) {
    Rng rng = root.fork(name);
    save_scene(dir / (name + ".txt"), synthetic_scene(spec, track_len, name, rng));
  }
}

}  // namespace twoblock
