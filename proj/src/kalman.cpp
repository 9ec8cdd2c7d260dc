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

#include "twoblock/kalman.hpp"

#include "twoblock/error.hpp"

namespace twoblock
{

namespace
{

Eigen::Matrix4d symmetrized(const Eigen::Matrix4d & m) { return 0.5 * (m + m.transpose()); }

}  // namespace

KalmanModel KalmanModel::constant_velocity(
  double step_seconds, double process_intensity, double measurement_std)
{
  const double dt = step_seconds;
  const double q = process_intensity;
  KalmanModel m;
  m.transition(0, 2) = dt;
  m.transition(1, 3) = dt;
  m.observation(0, 0) = 1.0;
  m.observation(1, 1) = 1.0;
  for (int axis = 0; axis < 2; ++axis) {
    m.process_noise(axis, axis) = q * dt * dt * dt / 3.0;
    m.process_noise(axis, axis + 2) = q * dt * dt / 2.0;
    m.process_noise(axis + 2, axis) = q * dt * dt / 2.0;
    m.process_noise(axis + 2, axis + 2) = q * dt;
  }
  m.measurement_noise = measurement_std * measurement_std * Eigen::Matrix2d::Identity();
  return m;
}

KalmanState kf_init(const KalmanModel & model, const Point & z)
{
  KalmanState s;
  s.mean.head<2>() = z;
  s.cov.topLeftCorner<2, 2>() = model.measurement_noise;
  s.cov.bottomRightCorner<2, 2>() =
    model.initial_velocity_std * model.initial_velocity_std * Eigen::Matrix2d::Identity();
  return s;
}

KalmanState kf_predict(const KalmanModel & model, const KalmanState & state)
{
  KalmanState next;
  next.mean = model.transition * state.mean;
  next.cov = symmetrized(
    model.transition * state.cov * model.transition.transpose() + model.process_noise);
  return next;
}

KalmanState kf_update(const KalmanModel & model, const KalmanState & state, const Point & z)
{
  if (!z.allFinite()) {
    throw FilterError("measurement is not finite");
  }
  const auto & H = model.observation;
  const Eigen::Matrix2d S = H * state.cov * H.transpose() + model.measurement_noise;
  const double scale = std::max(S.cwiseAbs().maxCoeff(), 1e-300);
  if (!(std::abs(S.determinant()) > 1e-24 * scale * scale)) {
    throw FilterError("innovation covariance is numerically singular");
  }
  const Eigen::Matrix<double, 4, 2> gain = state.cov * H.transpose() * S.inverse();
  KalmanState next;
  next.mean = state.mean + gain * (z - H * state.mean);
  next.cov = symmetrized((Eigen::Matrix4d::Identity() - gain * H) * state.cov);
  return next;
}

KalmanState kf_encode(const KalmanModel & model, const MaskedTrajectory & traj)
{
  traj.validate();
  std::size_t t = 0;
  while (!traj.observed[t]) {
    ++t;
  }
  KalmanState s = kf_init(model, traj.observations[t]);
  for (++t; t < traj.obs_len(); ++t) {
    s = kf_predict(model, s);
    if (traj.observed[t]) {
      s = kf_update(model, s, traj.observations[t]);
    }
  }
  return s;
}

Track kf_forecast(const KalmanModel & model, const KalmanState & state, std::size_t steps)
{
  if (steps == 0) {
    throw UsageError("kf_forecast needs at least one step");
  }
  Track out;
  out.reserve(steps);
  KalmanState s = state;
  for (std::size_t k = 0; k < steps; ++k) {
    s = kf_predict(model, s);
    out.push_back(model.observation * s.mean);
  }
  return out;
}

}  // namespace twoblock
