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

#ifndef TWOBLOCK__DATASETS_HPP_
#define TWOBLOCK__DATASETS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twoblock/numkit.hpp"
#include "twoblock/trajectory.hpp"

namespace twoblock
{

struct SceneRow
{
  double frame = 0.0;
  double pedestrian = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Annotated positions of one recording, sorted by (frame, pedestrian).
struct SceneTable
{
  std::string scene;
  std::vector<SceneRow> rows;
};

// Whitespace-separated `frame_id ped_id x y` records; blank lines and lines starting with '#'
// are skipped. Line numbers in errors are 1-based.
SceneTable parse_scene(std::istream & in, const std::string & scene, const std::string & source);
SceneTable load_scene(const std::filesystem::path & path, const std::string & scene);
void save_scene(const std::filesystem::path & path, const SceneTable & table);

/// Lists the scenes under a data directory. A scene is either a `<name>.txt` file or a
/// `<name>/` directory of `.txt` files. Names are lower-cased.
std::vector<std::string> list_scenes(const std::filesystem::path & data_dir);
// All tables belonging to one scene (one per file), in file-name order.
std::vector<SceneTable> load_scene_set(const std::filesystem::path & data_dir,
                                       const std::string & scene);

struct WindowSpec
{
  std::size_t obs_len = 8;
  std::size_t pred_len = 8;  // future steps after the observation window
  std::size_t stride = 1;
  double step_seconds = 0.4;

  void validate() const;
};

// One window per pedestrian and per stride-aligned start on the scene's timestep axis (the
// sorted distinct frame ids) where the pedestrian is present at every step. Masks are all
// observed and the ground-truth future is attached.
std::vector<MaskedTrajectory> make_windows(const SceneTable & scene, const WindowSpec & spec);

struct MaskDraw
{
  std::vector<bool> observed;
  double ratio = 0.0;
  // n_miss rounded to the full window and was reduced to keep one observed step.
  bool regenerated = false;
};

// Draws round(ratio * obs_len) distinct missing steps (half away from zero). Without a fixed
// ratio, the ratio is drawn from Uniform(0.2, 0.8).
MaskDraw gen_mask(std::size_t obs_len, Rng & rng, std::optional<double> ratio = std::nullopt);

/// Per-axis normalization statistics (population standard deviation).
struct NormStats
{
  Point mean = Point::Zero();
  Point std = Point::Ones();
  std::string source;

  Point apply(const Point & p) const { return (p - mean).cwiseQuotient(std); }
  Point invert(const Point & p) const { return p.cwiseProduct(std) + mean; }
  Track apply(const Track & track) const;
  Track invert(const Track & track) const;
  MaskedTrajectory apply(const MaskedTrajectory & traj) const;
  void validate() const;
};

NormStats fit_norm(const std::vector<Point> & positions, const std::string & source);
NormStats fit_norm(const std::vector<SceneTable> & train_scenes);

/// Synthetic constant-velocity tracks for oracle experiments.
///
/// Start positions are uniform in [-area, area]^2, headings uniform, speeds uniform in
/// [speed_min, speed_max]. The state (position, velocity) evolves with the constant-velocity
/// transition plus process noise whose covariance per axis is
///   q * [[dt^3/3, dt^2/2], [dt^2/2, dt]],
/// and observations add N(0, measurement_std^2) per axis. Futures are noise-free truth.
struct SyntheticSpec
{
  std::size_t count = 100;
  std::size_t obs_len = 8;
  std::size_t pred_len = 8;
  double step_seconds = 0.4;
  double speed_min = 0.5;
  double speed_max = 1.5;
  double process_intensity = 0.0;
  double measurement_std = 0.0;
  double area = 5.0;
};

std::vector<MaskedTrajectory> gen_synthetic_cv(const SyntheticSpec & spec, Rng & rng);

// Scene table of synthetic tracks, each `track_len` steps long and starting one timestep after
// the previous one; all positions carry measurement noise.
SceneTable synthetic_scene(const SyntheticSpec & spec, std::size_t track_len,
                           const std::string & name, Rng & rng);

// Writes one `<name>.txt` scene file per name into `dir`, each from its own
// stream forked off `seed`.
void write_synthetic_dataset(const std::filesystem::path & dir, const std::vector<std::string> & names,
                             const SyntheticSpec & spec, std::size_t track_len, std::uint64_t seed);

}  // namespace twoblock

#endif  // TWOBLOCK__DATASETS_HPP_
