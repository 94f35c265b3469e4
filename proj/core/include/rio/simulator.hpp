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

#include <cstdint>
#include <string>
#include <vector>

#include "rio/geom.hpp"
#include "rio/sensor_types.hpp"

namespace rio::sim {

enum class TrajectoryKind { kCircle, kFigure8, kRandomSmooth };

/// Parses "circle", "figure8" or "random_smooth"; throws std::invalid_argument otherwise.
TrajectoryKind parse_trajectory_kind(const std::string& name);
std::string to_string(TrajectoryKind kind);

struct TrajectorySample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  UnitQuat q = UnitQuat::Identity();
  Vec3 v = Vec3::Zero();      // world frame
  Vec3 a = Vec3::Zero();      // world-frame kinematic acceleration
  Vec3 omega = Vec3::Zero();  // body-frame angular rate

  FrameState state() const;
};

/// Planar, C2 ground-vehicle trajectory; heading follows the velocity.
class Trajectory {
 public:
  Trajectory() = default;
  TrajectorySample at(double t) const;
  double duration() const { return duration_; }
  TrajectoryKind kind() const { return kind_; }

 private:
  friend Trajectory make_trajectory(TrajectoryKind, double, double, double, std::uint64_t);

  struct Harmonic {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
  };

  // Position and its first two derivatives in the plane.
  void planar(double t, Vec3& p, Vec3& v, Vec3& a) const;

  TrajectoryKind kind_ = TrajectoryKind::kCircle;
  double duration_ = 0.0;
  double speed_ = 0.0;
  double yaw_rate_ = 0.0;
  double radius_ = 0.0;     // circle radius, figure-8 amplitude
  double frequency_ = 0.0;  // figure-8 angular frequency
  std::vector<Harmonic> along_;
  std::vector<Harmonic> across_;
};

/// `yaw_rate` sets the turn rate of the circle (radius = speed / yaw_rate) and
/// the typical turning frequency of the other kinds. Zero speed gives a
/// constant pose at the origin.
Trajectory make_trajectory(TrajectoryKind kind, double duration, double speed, double yaw_rate,
                           std::uint64_t seed);

struct SceneLandmark {
  long id = 0;
  Vec3 p = Vec3::Zero();
  double rcs = 0.0;  // dBsm
};

/// Constant-velocity point target alive in [t_begin, t_end].
struct DynamicObject {
  Vec3 p0 = Vec3::Zero();  // position at t_begin
  Vec3 v = Vec3::Zero();
  double t_begin = 0.0;
  double t_end = 0.0;
  double rcs = 0.0;

  Vec3 position(double t) const { return p0 + (t - t_begin) * v; }
  bool alive(double t) const { return t >= t_begin && t <= t_end; }
};

struct Scene {
  std::vector<SceneLandmark> landmarks;
  std::vector<DynamicObject> dynamic;
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Zero();
};

struct SensorSimParams {
  double scan_rate_hz = 10.0;
  double imu_rate_hz = 200.0;
  double fov_azimuth = 1.0472;
  double fov_elevation = 0.2618;
  double range_max = 50.0;

  double sigma_range = 0.0;    // m
  double sigma_angle = 0.0;    // rad, azimuth and elevation
  double sigma_doppler = 0.0;  // m/s
  double sigma_rcs = 0.0;      // dB
  double detection_prob = 1.0;
  double clutter_rate = 0.0;   // mean clutter points per scan
  double dynamic_frac = 0.0;   // target share of moving-object detections
  double min_dynamic_radial = 1.0;  // m/s

  // IMU model, continuous-time densities.
  double sigma_g = 0.0;
  double sigma_a = 0.0;
  double sigma_bg = 0.0;
  double sigma_ba = 0.0;
  double bias_g0 = 0.0;  // std of the initial gyro bias per axis
  double bias_a0 = 0.0;

  Extrinsics ext;
  GravityModel gravity;
  std::uint64_t seed = 1;

  bool valid() const;
};

/// Named noise presets: "none" (noise-free) and "noisy" (benchmark profile).
SensorSimParams noise_profile(const std::string& name);

struct SceneParams {
  double margin = 20.0;            // m around the trajectory footprint
  double area_per_cluster = 40.0;  // m^2
  int cluster_min = 3;
  int cluster_max = 6;
  double cluster_radius = 0.4;
  double min_separation = 0.15;
  double z_min = -0.5;
  double z_max = 2.5;
  double rcs_min = -10.0;
  double rcs_max = 30.0;
  int dynamic_group = 3;          // points per moving object
  double dynamic_lifetime = 1.5;  // s
};

/// Static clustered scatterers around the trajectory, plus moving objects
/// spawned in view so that roughly params.dynamic_frac of detections move.
Scene make_scene(const Trajectory& traj, const SensorSimParams& params, const SceneParams& scene_params = {});

std::vector<ImuSample> gen_imu(const Trajectory& traj, const SensorSimParams& params);

struct PointLabel {
  enum class Kind { kStatic, kDynamic, kClutter };
  Kind kind = Kind::kClutter;
  long landmark_id = -1;

  std::string to_string() const;
  static PointLabel parse(const std::string& text);
  bool operator==(const PointLabel&) const = default;
};

struct RadarSimOutput {
  std::vector<RadarScan> scans;
  std::vector<std::vector<PointLabel>> labels;  // parallel to scans[i].points
};

RadarSimOutput gen_radar(const Trajectory& traj, const Scene& scene, const SensorSimParams& params);

/// Everything the simulator emits for one sequence.
struct SimSequence {
  SensorSimParams params;
  Trajectory trajectory;
  Scene scene;
  std::vector<ImuSample> imu;
  std::vector<RadarScan> scans;
  std::vector<std::vector<PointLabel>> labels;
  std::vector<TrajectorySample> ground_truth;  // at scan times
};

SimSequence simulate(TrajectoryKind kind, double duration, double speed, double yaw_rate,
                     const SensorSimParams& params, const SceneParams& scene_params = {});

}  // namespace rio::sim
