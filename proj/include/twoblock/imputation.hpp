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

#ifndef TWOBLOCK__IMPUTATION_HPP_
#define TWOBLOCK__IMPUTATION_HPP_

#include <string>
#include <string_view>

#include "twoblock/trajectory.hpp"

namespace twoblock
{

enum class ImputationKind { kLast, kZero, kLinear };

std::string to_string(ImputationKind kind);
// Accepts "last", "zero", "linear" (and the "linner" spelling). Throws UsageError otherwise.
ImputationKind parse_imputation(std::string_view tag);

// Missing steps take the most recent observed position; leading gaps take the first observed.
Track fill_last(const MaskedTrajectory & traj);

// Missing steps become `fill` (the origin of whatever space the trajectory lives in).
Track fill_zero(const MaskedTrajectory & traj, const Point & fill = Point::Zero());

// Per-axis linear interpolation on the step index between flanking observations. Gaps at either
// end are extrapolated from the two nearest observations; a single observation gives a constant.
Track fill_linear(const MaskedTrajectory & traj);

Track impute(ImputationKind kind, const MaskedTrajectory & traj, const Point & zero_fill = Point::Zero());

}  // namespace twoblock

#endif  // TWOBLOCK__IMPUTATION_HPP_
