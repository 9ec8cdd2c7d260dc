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

#ifndef TWOBLOCK__TRAJECTORY_HPP_
#define TWOBLOCK__TRAJECTORY_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace twoblock
{

// A planar position in meters (or normalized units, depending on context).
using Point = Eigen::Vector2d;
using Track = std::vector<Point>;

/// Observation window of one agent with a per-step detection flag.
///
/// Missing observation steps hold NaN coordinates so nothing downstream can read them by
/// accident. `future` is the fully observed ground truth after the window (may be empty).
struct MaskedTrajectory
{
  Track observations;
  std::vector<bool> observed;
  Track future;
  std::int64_t agent_id = 0;
  std::string scene;
  double start_frame = 0.0;

  std::size_t obs_len() const { return observations.size(); }
  std::size_t missing_count() const;
  std::size_t observed_count() const { return obs_len() - missing_count(); }

  // Throws DataError when lengths disagree, an observed step is not finite, no step is
  // observed, or the future is not finite.
  void validate() const;
};

// Copy of `traj` with `mask` (true = observed) applied; masked steps become NaN.
MaskedTrajectory apply_mask(const MaskedTrajectory & traj, const std::vector<bool> & mask);

}  // namespace twoblock

#endif  // TWOBLOCK__TRAJECTORY_HPP_
