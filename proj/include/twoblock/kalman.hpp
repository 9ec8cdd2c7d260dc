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

#ifndef TWOBLOCK__KALMAN_HPP_
#define TWOBLOCK__KALMAN_HPP_

#include <Eigen/Dense>

#include <cstddef>

#include "twoblock/trajectory.hpp"

namespace twoblock
{

/// Linear-Gaussian constant-velocity model over the state (px, py, vx, vy).
///
///   x_t = F x_{t-1} + u_t,  u_t ~ N(0, Q)
///   z_t = H x_t + v_t,      v_t ~ N(0, R)
///
/// Q is the white-noise-acceleration discretization with intensity q:
///   per axis q * [[dt^3/3, dt^2/2], [dt^2/2, dt]].
struct KalmanModel
{
  Eigen::Matrix4d transition = Eigen::Matrix4d::Identity();
  Eigen::Matrix<double, 2, 4> observation = Eigen::Matrix<double, 2, 4>::Zero();
  Eigen::Matrix4d process_noise = Eigen::Matrix4d::Zero();
  Eigen::Matrix2d measurement_noise = Eigen::Matrix2d::Identity();
  // Prior velocity standard deviation used when the filter starts, m/s.
  double initial_velocity_std = 2.0;

  static KalmanModel constant_velocity(double step_seconds, double process_intensity,
                                       double measurement_std);
};

struct KalmanState
{
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();

  Point position() const { return mean.head<2>(); }
};

// Mean at the measurement with zero velocity; covariance diag(R, sigma_v^2 I).
KalmanState kf_init(const KalmanModel & model, const Point & z);

// Chapman-Kolmogorov step: mean <- F mean, cov <- F cov F^T + Q.
KalmanState kf_predict(const KalmanModel & model, const KalmanState & state);

// Bayes update with measurement z. Throws FilterError when the innovation covariance is
// numerically singular.
KalmanState kf_update(const KalmanModel & model, const KalmanState & state, const Point & z);

// Filters an observation window, skipping the update at missing steps. The filter starts at the
// first observed step; earlier missing steps carry no information and are ignored. Returns the
// posterior at the last observation step.
KalmanState kf_encode(const KalmanModel & model, const MaskedTrajectory & traj);

// Positions H mean after 1..steps successive predictions.
Track kf_forecast(const KalmanModel & model, const KalmanState & state, std::size_t steps);

}  // namespace twoblock

#endif  // TWOBLOCK__KALMAN_HPP_
