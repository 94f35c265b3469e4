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

#include <cstddef>
#include <vector>

#include "rio/sensor_types.hpp"

namespace rio {

struct PreprocessConfig {
  double fov_azimuth = 1.0472;    // rad, half-angle (60 deg)
  double fov_elevation = 0.2618;  // rad, half-angle (15 deg)
  double range_max = 50.0;        // m
  int radius_n = 2;               // neighbours required, self excluded
  double radius_d = 1.0;          // m
  double vel_threshold = 0.25;    // m/s

  bool valid() const {
    return fov_azimuth > 0 && fov_elevation > 0 && range_max > 0 && radius_n >= 1 && radius_d > 0 &&
           vel_threshold > 0;
  }
};

/// True when p is inside the configured range and angular field of view.
bool in_field_of_view(const Vec3& p, const PreprocessConfig& cfg);

std::vector<std::size_t> fov_filter_indices(const RadarScan& scan, const PreprocessConfig& cfg);
RadarScan fov_filter(const RadarScan& scan, const PreprocessConfig& cfg);

/// Keeps a point iff at least cfg.radius_n other points lie within cfg.radius_d.
std::vector<std::size_t> radius_filter_indices(const RadarScan& scan, const PreprocessConfig& cfg);
RadarScan radius_filter(const RadarScan& scan, const PreprocessConfig& cfg);

/// Radial velocity a static point at radar-frame position p should report,
/// given the IMU-frame state, the raw gyro reading and the radar extrinsics.
/// Throws std::invalid_argument for a zero-range point.
double estimate_doppler(const Vec3& p, const FrameState& x, const Vec3& gyro, const Extrinsics& ext);

/// Velocity of the radar origin expressed in the radar frame.
Vec3 radar_velocity(const FrameState& x, const Vec3& gyro, const Extrinsics& ext);

struct VelocityCheckResult {
  RadarScan static_points;
  RadarScan rejected;
  std::vector<std::size_t> static_indices;    // into the input scan
  std::vector<std::size_t> rejected_indices;  // into the input scan
};

/// Splits a scan into points whose Doppler agrees with the predicted ego-motion
/// (|v_est - v_d| <= cfg.vel_threshold) and the rest.
VelocityCheckResult velocity_check(const RadarScan& scan, const FrameState& x_pred, const Vec3& gyro,
                                   const Extrinsics& ext, const PreprocessConfig& cfg);

/// Copies the points at `indices`, keeping the timestamp.
RadarScan select_points(const RadarScan& scan, const std::vector<std::size_t>& indices);

}  // namespace rio
