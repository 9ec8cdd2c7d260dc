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

#include "twoblock/trajectory.hpp"

#include <algorithm>
#include <limits>

#include "twoblock/error.hpp"

namespace twoblock
{

std::size_t MaskedTrajectory::missing_count() const
{
  return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), false));
}

void MaskedTrajectory::validate() const
{
  if (observed.size() != observations.size()) {
    throw DataError("trajectory mask length does not match observation length");
  }
  bool any = false;
  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (observed[t]) {
      any = true;
      if (!observations[t].allFinite()) {
        throw DataError("observed step " + std::to_string(t) + " has non-finite coordinates");
      }
    }
  }
  if (!any) {
    throw DataError("trajectory has no observed step");
  }
  for (const auto & p : future) {
    if (!p.allFinite()) {
      throw DataError("ground-truth future has non-finite coordinates");
    }
  }
}

MaskedTrajectory apply_mask(const MaskedTrajectory & traj, const std::vector<bool> & mask)
{
  if (mask.size() != traj.obs_len()) {
    throw ShapeError(
      "apply_mask: mask has " + std::to_string(mask.size()) + " steps, trajectory " +
      std::to_string(traj.obs_len()));
  }
  MaskedTrajectory out = traj;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < mask.size(); ++t) {
    out.observed[t] = traj.observed[t] && mask[t];
    if (!out.observed[t]) {
      out.observations[t] = Point(nan, nan);
    }
  }
  return out;
}

}  // namespace twoblock
