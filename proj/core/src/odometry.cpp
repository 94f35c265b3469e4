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

#include "rio/odometry.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>

namespace rio {

Odometry::Odometry(OdometryConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.preprocess.valid()) throw std::invalid_argument("invalid preprocess configuration");
  if (!cfg_.assoc.valid()) throw std::invalid_argument("invalid association configuration");
  if (!cfg_.estimator.valid()) throw std::invalid_argument("invalid estimator configuration");
  if (!cfg_.imu_noise.valid()) throw std::invalid_argument("invalid imu noise configuration");
  if (!(cfg_.imu_rate_hz > 0.0)) throw std::invalid_argument("imu rate must be positive");
}

void Odometry::buffer_imu(std::span<const ImuSample> imu) {
  for (const auto& s : imu) {
    if (imu_buffer_.empty() || s.t > imu_buffer_.back().t) imu_buffer_.push_back(s);
  }
}

OdometryOutput Odometry::first_scan(const RadarScan& scan) {
  OdometryOutput out;
  out.scan_index = 0;
  out.t = scan.t;

  std::vector<ImuSample> init_imu;
  for (const auto& s : imu_buffer_) {
    if (s.t <= scan.t + 1e-9 && s.t >= scan.t - 0.1) init_imu.push_back(s);
  }
  const InitResult init = initialize(scan, init_imu, cfg_.ext, cfg_.preprocess);
  FrameState x = init.state;
  x.t = scan.t;
  out.degraded = init.degraded;
  if (init.degraded) out.note = "degenerate initialization";

  const Vec3 gyro = gyro_at(imu_buffer_, scan.t);
  const auto fov_idx = fov_filter_indices(scan, cfg_.preprocess);
  const RadarScan fov = select_points(scan, fov_idx);
  const auto rad_idx = radius_filter_indices(fov, cfg_.preprocess);
  const RadarScan rad = select_points(fov, rad_idx);
  RadarScan stat = rad;
  std::vector<std::size_t> stat_idx(rad.points.size());
  for (std::size_t i = 0; i < stat_idx.size(); ++i) stat_idx[i] = i;
  if (!cfg_.estimator.ablation.disable_velocity_filter) {
    auto vc = velocity_check(rad, x, gyro, cfg_.ext, cfg_.preprocess);
    stat = std::move(vc.static_points);
    stat_idx = std::move(vc.static_indices);
  }
  for (const std::size_t i : stat_idx) out.static_indices.push_back(fov_idx[rad_idx[i]]);

  out.counts = {scan.points.size(), fov.points.size(), rad.points.size(), stat.points.size(), 0, 0};
  update_tracks(window_.tracks, {}, 0, stat);
  window_.frames.push_back({0, x, std::move(stat), gyro});
  out.state = x;
  last_t_ = scan.t;
  scan_count_ = 1;
  return out;
}

void Odometry::add_p2p_observations(long frame_id) {
  for (const auto& tr : window_.tracks.active) {
    if (!tr.landmark_id || tr.last_frame() != frame_id || tr.hit_count() < 2) continue;
    if (window_.landmarks.count(*tr.landmark_id) == 0) continue;
    window_.observations.push_back({frame_id, *tr.landmark_id, tr.observations.back().point});
  }

  const ObservationToWorld to_world = [this](long frame, const Vec3& p) -> std::optional<Vec3> {
    const auto idx = window_.frame_index(frame);
    if (!idx) return std::nullopt;
    const Pose world_radar = window_.frames[*idx].state.pose() * cfg_.ext.pose();
    return world_radar.apply(p);
  };
  const std::vector<Landmark> fresh = promote(window_.tracks, cfg_.assoc, to_world);
  for (const auto& lm : fresh) {
    window_.landmarks.emplace(lm.id, lm);
    for (const auto& tr : window_.tracks.active) {
      if (tr.landmark_id != lm.id) continue;
      for (const auto& obs : tr.observations) {
        if (window_.frame_index(obs.frame)) window_.observations.push_back({obs.frame, lm.id, obs.point});
      }
    }
  }
}

OdometryOutput Odometry::process_scan(const RadarScan& scan, std::span<const ImuSample> imu) {
  buffer_imu(imu);
  if (scan_count_ == 0) return first_scan(scan);
  if (!(scan.t > last_t_)) {
    throw std::invalid_argument("scan at t=" + std::to_string(scan.t) + " does not follow t=" + std::to_string(last_t_));
  }
  if (imu_buffer_.empty()) throw std::invalid_argument("no imu samples before scan " + std::to_string(scan_count_));

  const long frame_id = scan_count_;
  OdometryOutput out;
  out.scan_index = frame_id;
  out.t = scan.t;

  const double period = 1.0 / cfg_.imu_rate_hz;
  const std::vector<ImuSample> samples = slice_imu(imu_buffer_, last_t_, scan.t);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (samples[k].t - samples[k - 1].t > 2.0 * period + 1e-9) {
      out.degraded = true;
      out.note = "imu gap before scan " + std::to_string(frame_id);
    }
  }
  if (imu_buffer_.back().t < scan.t - 0.5 * period) {
    out.degraded = true;
    out.note = "imu does not cover scan " + std::to_string(frame_id);
  }

  const WindowFrame& prev = window_.frames.back();
  FrameState pred = propagate(prev.state, samples, cfg_.gravity);
  pred.t = scan.t;
  auto pre = std::make_shared<const Preintegrated>(
      preintegrate(samples, ImuBias{prev.state.ba, prev.state.bg}, cfg_.imu_noise));
  const Vec3 gyro = gyro_at(imu_buffer_, scan.t);

  const auto fov_idx = fov_filter_indices(scan, cfg_.preprocess);
  const RadarScan fov = select_points(scan, fov_idx);
  const auto rad_idx = radius_filter_indices(fov, cfg_.preprocess);
  const RadarScan rad = select_points(fov, rad_idx);
  RadarScan stat = rad;
  std::vector<std::size_t> stat_idx(rad.points.size());
  for (std::size_t i = 0; i < stat_idx.size(); ++i) stat_idx[i] = i;
  if (!cfg_.estimator.ablation.disable_velocity_filter) {
    auto vc = velocity_check(rad, pred, gyro, cfg_.ext, cfg_.preprocess);
    stat = std::move(vc.static_points);
    stat_idx = std::move(vc.static_indices);
  }
  for (const std::size_t i : stat_idx) out.static_indices.push_back(fov_idx[rad_idx[i]]);

  AssocConfig ac = cfg_.assoc;
  ac.use_rcs = cfg_.assoc.use_rcs && !cfg_.estimator.ablation.disable_rcs_filter;
  const Pose world_prev = prev.state.pose() * cfg_.ext.pose();
  const Pose world_curr = pred.pose() * cfg_.ext.pose();
  const std::vector<Correspondence> matches =
      associate_scans(prev.static_points, stat, world_prev.inverse() * world_curr, ac);
  update_tracks(window_.tracks, matches, frame_id, stat);

  out.counts = {scan.points.size(), fov.points.size(), rad.points.size(), stat.points.size(), matches.size(), 0};

  window_.frames.push_back({frame_id, pred, stat, gyro});
  window_.preints.push_back(std::move(pre));
  if (!cfg_.estimator.ablation.disable_p2p_residual) add_p2p_observations(frame_id);

  for (std::size_t k = 0; k < window_.preints.size(); ++k) {
    const FrameState& xs = window_.frames[k].state;
    const ImuBias bias{xs.ba, xs.bg};
    if (bias_step_exceeds(*window_.preints[k], bias, cfg_.bias_repropagate)) {
      window_.preints[k] = std::make_shared<const Preintegrated>(
          preintegrate(window_.preints[k]->samples, bias, cfg_.imu_noise));
    }
  }

  const AblationFlags& ab = cfg_.estimator.ablation;
  if (!(ab.disable_doppler_residual && ab.disable_p2p_residual)) {
    Problem pb = build_problem(window_, cfg_.estimator, cfg_.ext, cfg_.gravity);
    out.solve = solve(pb, cfg_.estimator);
    if (out.solve.diverged) {
      out.diverged = true;
      out.note = "solver diverged at scan " + std::to_string(frame_id);
    } else {
      write_back(pb, window_);
    }
  }
  out.state = window_.frames.back().state;
  out.counts.landmarks = window_.landmarks.size();

  slide_window(window_, cfg_.estimator);

  // Keep a short history for interpolation at the next boundary.
  const double keep_from = scan.t - 1.0;
  const auto first_kept = std::find_if(imu_buffer_.begin(), imu_buffer_.end(),
                                       [keep_from](const ImuSample& s) { return s.t >= keep_from; });
  if (first_kept != imu_buffer_.begin() && first_kept != imu_buffer_.end()) {
    imu_buffer_.erase(imu_buffer_.begin(), first_kept - 1);
  }
  last_t_ = scan.t;
  ++scan_count_;
  return out;
}

std::vector<OdometryOutput> run_odometry(const OdometryConfig& cfg, std::span<const ImuSample> imu,
                                         std::span<const RadarScan> scans,
                                         const std::function<bool(const OdometryOutput&)>& on_output) {
  Odometry odo(cfg);
  std::vector<OdometryOutput> outputs;
  outputs.reserve(scans.size());
  std::size_t cursor = 0;
  for (const auto& scan : scans) {
    std::size_t end = cursor;
    while (end < imu.size() && imu[end].t < scan.t) ++end;
    if (end < imu.size()) ++end;  // first sample at or after the scan
    outputs.push_back(odo.process_scan(scan, imu.subspan(cursor, end - cursor)));
    cursor = end;
    if (on_output && !on_output(outputs.back())) break;
  }
  return outputs;
}

}  // namespace rio
