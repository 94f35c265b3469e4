// Copyright 2026 The rio Authors
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

#pragma once

#include <span>
#include <vector>

#include "rio/geom.hpp"
#include "rio/sensor_types.hpp"

namespace rio {

/// Continuous-time noise densities of the IMU model.
struct ImuNoiseParams {
  double sigma_g = 1e-3;   // rad/s/sqrt(Hz)
  double sigma_a = 1e-2;   // m/s^2/sqrt(Hz)
  double sigma_bg = 1e-4;  // rad/s^2/sqrt(Hz)
  double sigma_ba = 1e-3;  // m/s^3/sqrt(Hz)

  bool valid() const { return sigma_g > 0 && sigma_a > 0 && sigma_bg > 0 && sigma_ba > 0; }
};

struct ImuBias {
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();
};

/// Relative motion expressed in the frame of the first sample.
struct DeltaState {
  Vec3 dp = Vec3::Zero();
  UnitQuat dq = UnitQuat::Identity();
  Vec3 dv = Vec3::Zero();
};

// Error-state ordering used by the covariance and every 15-dof Jacobian.
inline constexpr int kP = 0;
inline constexpr int kR = 3;
inline constexpr int kV = 6;
inline constexpr int kBa = 9;
inline constexpr int kBg = 12;

/// Pre-integrated IMU measurement between two radar scans.
struct Preintegrated {
  double dt = 0.0;
  DeltaState delta;
  Mat<15, 15> cov = Mat<15, 15>::Zero();
  /// d(dp, dtheta, dv) / d(ba, bg) at bias_lin.
  Mat<9, 6> jac_bias = Mat<9, 6>::Zero();
  ImuBias bias_lin;
  ImuNoiseParams noise;
  /// Kept so the estimator can re-integrate after a large bias change.
  std::vector<ImuSample> samples;

  Mat3 dp_dba() const { return jac_bias.block<3, 3>(0, 0); }
  Mat3 dp_dbg() const { return jac_bias.block<3, 3>(0, 3); }
  Mat3 dq_dbg() const { return jac_bias.block<3, 3>(3, 3); }
  Mat3 dv_dba() const { return jac_bias.block<3, 3>(6, 0); }
  Mat3 dv_dbg() const { return jac_bias.block<3, 3>(6, 3); }
};

/// Midpoint pre-integration of a sample run. Throws std::invalid_argument on
/// fewer than two samples or non-increasing timestamps.
Preintegrated preintegrate(std::span<const ImuSample> samples, const ImuBias& bias_lin,
                           const ImuNoiseParams& noise);

/// First-order bias update of the deltas through the stored bias Jacobian.
DeltaState bias_correct(const Preintegrated& pre, const ImuBias& bias_new);

/// True when the bias moved further than `threshold` from the linearization point.
bool bias_step_exceeds(const Preintegrated& pre, const ImuBias& bias_new, double threshold = 0.1);

/// Concatenates deltas of two adjacent intervals (b starts where a ends).
DeltaState compose(const Preintegrated& a, const Preintegrated& b);

struct ImuJacobians {
  Mat<15, 15> wrt_i = Mat<15, 15>::Zero();
  Mat<15, 15> wrt_j = Mat<15, 15>::Zero();
};

/// Unweighted IMU residual: position, rotation, velocity, accel-bias and gyro-bias
/// blocks. Jacobians use the local increments (dp, dtheta, dv, dba, dbg) with
/// right-multiplicative rotation updates.
Vec<15> residual_imu(const FrameState& xi, const FrameState& xj, const Preintegrated& pre,
                     const GravityModel& g, ImuJacobians* jac = nullptr);

/// Dead-reckons `x` through the samples with the same midpoint scheme.
/// Throws std::invalid_argument when samples do not start at x.t (within half a
/// sample period).
FrameState propagate(const FrameState& x, std::span<const ImuSample> samples, const GravityModel& g);

/// Linear interpolation between two samples at time t.
ImuSample interpolate_imu(const ImuSample& a, const ImuSample& b, double t);

/// Samples covering [t0, t1] with interpolated endpoints. Outside the stream
/// the nearest sample is held. Throws std::invalid_argument on an empty stream.
std::vector<ImuSample> slice_imu(std::span<const ImuSample> stream, double t0, double t1);

/// Gyro reading interpolated at t.
Vec3 gyro_at(std::span<const ImuSample> stream, double t);

}  // namespace rio
