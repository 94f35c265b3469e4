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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rio/association.hpp"
#include "rio/estimator.hpp"
#include "rio/imu_preint.hpp"
#include "rio/preprocess.hpp"
#include "rio/sensor_types.hpp"

namespace rio {

struct OdometryConfig {
  PreprocessConfig preprocess;
  AssocConfig assoc;
  EstimatorConfig estimator;
  ImuNoiseParams imu_noise;
  GravityModel gravity;
  Extrinsics ext;
  double imu_rate_hz = 200.0;
  /// Bias change that triggers re-integration instead of first-order correction.
  double bias_repropagate = 0.1;
};

/// Point counts along the filter chain of one scan.
struct StageCounts {
  std::size_t raw = 0;
  std::size_t fov = 0;
  std::size_t radius = 0;
  std::size_t static_points = 0;
  std::size_t matched = 0;
  std::size_t landmarks = 0;
};

struct OdometryOutput {
  long scan_index = 0;
  double t = 0.0;
  FrameState state;
  StageCounts counts;
  bool degraded = false;
  bool diverged = false;
  std::string note;
  SolveReport solve;
  /// Raw-scan indices of the points kept as static.
  std::vector<std::size_t> static_indices;
};

/// Online radar-inertial odometry over one radar and one IMU stream.
class Odometry {
 public:
  explicit Odometry(OdometryConfig cfg);

  /// Processes the next scan. `imu` must hold the samples up to (and ideally
  /// just past) scan.t that have not been passed before; already-seen
  /// timestamps are ignored. Throws std::invalid_argument when scans go back in time.
  OdometryOutput process_scan(const RadarScan& scan, std::span<const ImuSample> imu);

  const SlidingWindow& window() const { return window_; }
  const OdometryConfig& config() const { return cfg_; }

 private:
  void buffer_imu(std::span<const ImuSample> imu);
  OdometryOutput first_scan(const RadarScan& scan);
  void add_p2p_observations(long frame_id);

  OdometryConfig cfg_;
  SlidingWindow window_;
  std::vector<ImuSample> imu_buffer_;
  long scan_count_ = 0;
  double last_t_ = 0.0;
};

/// Feeds a whole recorded sequence through an Odometry instance, handing each
/// scan the IMU samples up to the first sample at or after its timestamp.
/// Stops early when `on_output` returns false.
std::vector<OdometryOutput> run_odometry(const OdometryConfig& cfg, std::span<const ImuSample> imu,
                                         std::span<const RadarScan> scans,
                                         const std::function<bool(const OdometryOutput&)>& on_output = {});

}  // namespace rio
