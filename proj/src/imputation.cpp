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

#include "twoblock/imputation.hpp"

#include <vector>

#include "twoblock/error.hpp"

namespace twoblock
{

namespace
{

std::vector<std::size_t> observed_indices(const MaskedTrajectory & traj)
{
  if (traj.observed.size() != traj.observations.size()) {
    throw ShapeError("imputation: mask length does not match observation length");
  }
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < traj.observed.size(); ++t) {
    if (traj.observed[t]) {
      idx.push_back(t);
    }
  }
  return idx;
}

// Point on the line through (t0, p0) and (t1, p1), evaluated at t.
Point along(std::size_t t0, const Point & p0, std::size_t t1, const Point & p1, std::size_t t)
{
  const double s =
    (static_cast<double>(t) - static_cast<double>(t0)) / (static_cast<double>(t1) - static_cast<double>(t0));
  return p0 + s * (p1 - p0);
}

}  // namespace

std::string to_string(ImputationKind kind)
{
  switch (kind) {
    case ImputationKind::kLast:
      return "last";
    case ImputationKind::kZero:
      return "zero";
    case ImputationKind::kLinear:
      return "linear";
  }
  return "?";
}

ImputationKind parse_imputation(std::string_view tag)
{
  if (tag == "last") {
    return ImputationKind::kLast;
  }
  if (tag == "zero") {
    return ImputationKind::kZero;
  }
  if (tag == "linear" || tag == "linner") {
    return ImputationKind::kLinear;
  }
  throw UsageError("unknown imputation '" + std::string(tag) + "' (valid: last, zero, linear)");
}

Track fill_last(const MaskedTrajectory & traj)
{
  const auto idx = observed_indices(traj);
  if (idx.empty()) {
    throw ImputationError("last filling needs at least one observed step");
  }
  Track out = traj.observations;
  Point last = traj.observations[idx.front()];
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (traj.observed[t]) {
      last = traj.observations[t];
    } else {
      out[t] = last;
    }
  }
  return out;
}

Track fill_zero(const MaskedTrajectory & traj, const Point & fill)
{
  observed_indices(traj);
  Track out = traj.observations;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (!traj.observed[t]) {
      out[t] = fill;
    }
  }
  return out;
}

Track fill_linear(const MaskedTrajectory & traj)
{
  const auto idx = observed_indices(traj);
  if (idx.empty()) {
    throw ImputationError("linear filling needs at least one observed step");
  }
  Track out = traj.observations;
  if (idx.size() == 1) {
    for (auto & p : out) {
      p = traj.observations[idx.front()];
    }
    return out;
  }
  const auto & obs = traj.observations;
  std::size_t k = 0;  // idx[k] is the first observed step at or after t
  for (std::size_t t = 0; t < out.size(); ++t) {
    while (k < idx.size() && idx[k] < t) {
      ++k;
    }
    if (traj.observed[t]) {
      continue;
    }
    std::size_t a = 0;
    std::size_t b = 0;
    if (k == 0) {
      a = idx[0];
      b = idx[1];
    } else if (k == idx.size()) {
      a = idx[idx.size() - 2];
      b = idx[idx.size() - 1];
    } else {
      a = idx[k - 1];
      b = idx[k];
    }
    out[t] = along(a, obs[a], b, obs[b], t);
  }
  return out;
}

Track impute(ImputationKind kind, const MaskedTrajectory & traj, const Point & zero_fill)
{
  switch (kind) {
    case ImputationKind::kLast:
      return fill_last(traj);
    case ImputationKind::kZero:
      return fill_zero(traj, zero_fill);
    case ImputationKind::kLinear:
      return fill_linear(traj);
  }
  throw UsageError("unknown imputation kind");
}

}  // namespace twoblock
