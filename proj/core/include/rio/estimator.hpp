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
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rio/association.hpp"
#include "rio/geom.hpp"
#include "rio/imu_preint.hpp"
#include "rio/preprocess.hpp"
#include "rio/sensor_types.hpp"

namespace rio {

/// Switches reproducing the component ablations.
struct AblationFlags {
  bool disable_imu_residual = false;
  bool disable_doppler_residual = false;
  bool disable_p2p_residual = false;
  bool disable_velocity_filter = false;
  bool disable_rcs_filter = false;

  /// Parses one of the five flag names (with or without the "disable_" prefix).
  bool set(const std::string& name);
};

struct EstimatorConfig {
  int window_k = 6;
  double w_doppler = 1.0;
  double w_p2p = 1.0;
  double robust_delta = 0.5;  // Huber threshold on P2P, metres; 0 disables
  int max_iters = 10;
  double rel_tol = 1e-6;
  double lm_lambda_init = 1e-4;
  AblationFlags ablation;

  bool valid() const { return window_k >= 2 && w_doppler > 0 && w_p2p > 0 && max_iters > 0 && robust_delta >= 0; }
};

// ---------------------------------------------------------------------------
// Radar residuals

struct DopplerJacobian {
  Mat<1, 15> wrt_frame = Mat<1, 15>::Zero();
};

/// Predicted minus measured Doppler of a static point. Throws on zero range.
double residual_doppler(const FrameState& x, const RadarPoint& pt, const Vec3& gyro, const Extrinsics& ext,
                        DopplerJacobian* jac = nullptr);

struct P2PJacobian {
  Mat<3, 15> wrt_frame = Mat<3, 15>::Zero();
  Mat3 wrt_landmark = Mat3::Identity();
};

/// Landmark minus the measurement mapped into the world frame.
Vec3 residual_p2p(const FrameState& x, const Landmark& lm, const RadarPoint& pt, const Extrinsics& ext,
                  P2PJacobian* jac = nullptr);

// ---------------------------------------------------------------------------
// Window

struct WindowFrame {
  long id = 0;  // scan index
  FrameState state;
  RadarScan static_points;
  Vec3 gyro = Vec3::Zero();  // gyro reading at the scan time
};

struct P2PObservation {
  long frame_id = 0;
  long landmark_id = 0;
  RadarPoint point;
};

struct SlidingWindow {
  std::deque<WindowFrame> frames;
  /// preints[k] links frames[k] to frames[k + 1].
  std::deque<std::shared_ptr<const Preintegrated>> preints;
  std::map<long, Landmark> landmarks;
  std::vector<P2PObservation> observations;
  TrackSet tracks;

  /// The gauge is always the oldest frame.
  std::size_t gauge() const { return 0; }
  std::optional<std::size_t> frame_index(long id) const;
};

// ---------------------------------------------------------------------------
// Problem

struct ImuFactor {
  std::size_t frame_i = 0;  // links frame_i and frame_i + 1
  std::shared_ptr<const Preintegrated> pre;
  Mat<15, 15> sqrt_info = Mat<15, 15>::Identity();
};

struct DopplerFactor {
  std::size_t frame = 0;
  RadarPoint point;
  Vec3 gyro = Vec3::Zero();
};

struct P2PFactor {
  std::size_t frame = 0;
  std::size_t landmark = 0;  // index into Problem::landmarks
  RadarPoint point;
};

struct Problem {
  std::vector<FrameState> frames;
  std::vector<Landmark> landmarks;
  std::vector<ImuFactor> imu;
  std::vector<DopplerFactor> doppler;
  std::vector<P2PFactor> p2p;
  Extrinsics ext;
  GravityModel gravity;
  double w_doppler = 1.0;
  double w_p2p = 1.0;
  double huber_delta = 0.0;
  /// Free rotational dofs of the gauge frame: 2 keeps roll/pitch (yaw fixed), 0 fixes all.
  int gauge_rot_dof = 2;

  std::size_t num_factors() const { return imu.size() + doppler.size() + p2p.size(); }
  /// Local parameter dimension of frame f after gauge fixing.
  int frame_dim(std::size_t f) const { return f == 0 ? 9 + gauge_rot_dof : 15; }
  /// Total number of Jacobian columns (frames then landmarks).
  std::size_t num_params() const;
};

/// Assembles every enabled factor over the window contents.
/// Throws std::invalid_argument on an empty window.
Problem build_problem(const SlidingWindow& window, const EstimatorConfig& cfg, const Extrinsics& ext,
                      const GravityModel& g);

/// Square-root information of a pre-integration covariance.
Mat<15, 15> imu_sqrt_information(const Preintegrated& pre);

struct CostBreakdown {
  double imu = 0.0;
  double doppler = 0.0;
  double p2p = 0.0;
  double total() const { return imu + doppler + p2p; }
};

/// Weighted, robustified objective at the current parameter values.
CostBreakdown evaluate_cost(const Problem& problem);

/// Huber loss on a squared norm; delta <= 0 is plain least squares.
double huber_loss(double squared_norm, double delta);

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  bool diverged = false;
  std::vector<double> accepted_costs;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on the manifold. Landmarks are
/// eliminated with a Schur complement. On a non-finite cost the parameters
/// are restored and the report is flagged as diverged.
SolveReport solve(Problem& problem, const EstimatorConfig& cfg);

/// Applies the problem's parameter values back into the window.
void write_back(const Problem& problem, SlidingWindow& window);

/// Removes the oldest frame when the window is at capacity, together with its
/// pre-integration, its observations and landmarks no longer observed.
/// Returns true when a frame was dropped.
bool slide_window(SlidingWindow& window, const EstimatorConfig& cfg);

struct InitResult {
  FrameState state;
  bool degraded = false;
};

/// First state: origin position, roll/pitch from the mean accelerometer
/// direction, zero yaw and biases, velocity from a least-squares ego-velocity
/// fit over the scan's line-of-sight Doppler readings.
InitResult initialize(const RadarScan& scan, std::span<const ImuSample> imu, const Extrinsics& ext,
                      const PreprocessConfig& pre_cfg);

/// Least-squares radar-frame ego-velocity; nullopt when the line-of-sight
/// directions do not span three dimensions.
std::optional<Vec3> ego_velocity_ls(std::span<const RadarPoint> points);

}  // namespace rio
