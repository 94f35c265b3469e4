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
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rio/geom.hpp"
#include "rio/odometry.hpp"
#include "rio/sensor_types.hpp"
#include "rio/simulator.hpp"

namespace rio {

/// Malformed input, located by file, 1-based line and 1-based column
/// (column 0 when the problem concerns the whole line or file).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

// ---------------------------------------------------------------------------
// key = value text (meta and config files)

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// One `key = value` per line; blank lines and `#` comments are skipped.
std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& file);

struct SequenceMeta {
  double imu_rate_hz = 200.0;
  double scan_rate_hz = 10.0;
  double gravity_z = 9.81;
  /// Multiplier from the stored Doppler to the internal closing-positive convention.
  int doppler_sign = 1;
  Extrinsics ext;
};

SequenceMeta parse_meta(std::string_view text, const std::string& file);
std::string format_meta(const SequenceMeta& meta);

/// Overrides configuration fields from key/value pairs. Unknown keys and bad
/// values raise ParseError.
void apply_config(OdometryConfig& cfg, const std::vector<KeyValue>& entries, const std::string& file);
/// Every configurable field, in the dialect accepted by apply_config.
std::string format_config(const OdometryConfig& cfg);

// ---------------------------------------------------------------------------
// Sequence directories

struct StampedPose {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  UnitQuat q = UnitQuat::Identity();

  Pose pose() const { return {q, p}; }
};

struct Sequence {
  SequenceMeta meta;
  std::vector<ImuSample> imu;
  std::vector<RadarScan> scans;
  std::vector<StampedPose> ground_truth;           // empty when gt.csv is absent
  std::vector<std::vector<sim::PointLabel>> labels;  // empty when labels.csv is absent
};

std::vector<ImuSample> parse_imu_csv(std::string_view text, const std::string& file);
/// `fallback_t` is used for a scan file holding no rows.
RadarScan parse_scan_csv(std::string_view text, const std::string& file, double fallback_t);
std::vector<StampedPose> parse_gt_csv(std::string_view text, const std::string& file);

std::string format_imu_csv(const std::vector<ImuSample>& imu);
std::string format_scan_csv(const RadarScan& scan, int doppler_sign = 1);
std::string format_gt_csv(const std::vector<StampedPose>& poses);
std::string format_labels_csv(const std::vector<std::vector<sim::PointLabel>>& labels);

/// Reads imu.csv, scans/NNNNNN.csv, meta.txt and the optional gt.csv and
/// labels.csv. Throws ParseError on malformed rows or non-increasing time.
Sequence read_sequence(const std::filesystem::path& dir);
void write_sequence(const std::filesystem::path& dir, const Sequence& seq);

/// Converts a simulator run into the on-disk representation.
Sequence to_sequence(const sim::SimSequence& sim);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// RCS proxy in dB with the range term removed: 10 log10(intensity r^4).
/// Throws std::invalid_argument on non-positive inputs.
double intensity_to_rcs(double intensity, double range);

// ---------------------------------------------------------------------------
// Trajectories and metrics

/// Lines "t px py pz qx qy qz qw". Values use nine significant digits, or
/// more when nine would not reproduce the stored double.
std::string export_trajectory_tum(const std::vector<StampedPose>& poses);
std::vector<StampedPose> parse_trajectory_tum(std::string_view text, const std::string& file);

StampedPose stamped(const FrameState& x);

struct Metrics {
  double ape_trans_rmse = 0.0;  // m
  double ape_rot_rmse = 0.0;    // deg
  double rpe_trans_rmse = 0.0;  // m
  double rpe_rot_rmse = 0.0;    // deg
  std::vector<double> ape_trans;
  std::vector<double> ape_rot;
  std::vector<double> rpe_trans;
  std::vector<double> rpe_rot;
};

enum class Alignment { kNone, kSE3 };

/// Index pairs (est, gt) matched by nearest timestamp within max_dt.
/// A negative max_dt uses half the median ground-truth spacing.
std::vector<std::pair<std::size_t, std::size_t>> associate_by_time(const std::vector<StampedPose>& est,
                                                                   const std::vector<StampedPose>& gt,
                                                                   double max_dt = -1.0);

/// Absolute pose error after optional rigid alignment of the estimate.
/// Throws std::invalid_argument when fewer than three poses associate.
Metrics compute_ape(const std::vector<StampedPose>& est, const std::vector<StampedPose>& gt,
                    Alignment align = Alignment::kSE3, double max_dt = -1.0);

/// Relative pose error over pose pairs `delta` associations apart.
Metrics compute_rpe(const std::vector<StampedPose>& est, const std::vector<StampedPose>& gt, int delta = 1,
                    double max_dt = -1.0);

/// APE and RPE in one record.
Metrics evaluate_trajectory(const std::vector<StampedPose>& est, const std::vector<StampedPose>& gt,
                            int rpe_delta = 1, Alignment align = Alignment::kSE3);

}  // namespace rio
