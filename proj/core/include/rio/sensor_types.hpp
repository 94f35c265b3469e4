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
#include <string>
#include <vector>

#include "rio/geom.hpp"

namespace rio {

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s, body frame
  Vec3 accel = Vec3::Zero();  // specific force, m/s^2, body frame
};

/// One radar detection, expressed in the radar frame.
struct RadarPoint {
  Vec3 p = Vec3::Zero();  // m
  double doppler = 0.0;   // m/s, positive when the sensor closes on a static target
  double rcs = 0.0;       // dBsm
};

struct RadarScan {
  double t = 0.0;
  std::vector<RadarPoint> points;
};

struct FrameState {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  UnitQuat q = UnitQuat::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();

  Pose pose() const { return {q, p}; }
};

/// Radar-to-IMU transform: x_imu = rot * x_radar + trans.
struct Extrinsics {
  UnitQuat rot = UnitQuat::Identity();
  Vec3 trans = Vec3::Zero();

  Pose pose() const { return {rot, trans}; }
};

struct Landmark {
  long id = -1;
  Vec3 l = Vec3::Zero();  // world frame
};

/// Gravity along +z: a resting accelerometer reads (0, 0, g_z).
struct GravityModel {
  double g_z = 9.81;
  Vec3 vec() const { return {0.0, 0.0, g_z}; }
};

struct ScanViolation {
  std::size_t point_index = 0;
  std::string what;
};

/// Lists every invariant a scan breaks; empty when the scan is well formed.
std::vector<ScanViolation> validate_scan(const RadarScan& scan);

/// |b| sanity bound used by validate_state.
inline constexpr double kDefaultBiasBound = 1.0;

bool state_is_sane(const FrameState& x, double bias_bound = kDefaultBiasBound);

}  // namespace rio
