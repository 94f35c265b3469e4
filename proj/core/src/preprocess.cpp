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

#include "rio/preprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "rio/spatial_grid.hpp"

namespace rio {

bool in_field_of_view(const Vec3& p, const PreprocessConfig& cfg) {
  const double range = p.norm();
  if (!(range > 0.0) || range > cfg.range_max) return false;
  const double azimuth = std::atan2(p.y(), p.x());
  const double elevation = std::atan2(p.z(), std::hypot(p.x(), p.y()));
  return std::abs(azimuth) <= cfg.fov_azimuth && std::abs(elevation) <= cfg.fov_elevation;
}

RadarScan select_points(const RadarScan& scan, const std::vector<std::size_t>& indices) {
  RadarScan out;
  out.t = scan.t;
  out.points.reserve(indices.size());
  for (const std::size_t i : indices) out.points.push_back(scan.points[i]);
  return out;
}

std::vector<std::size_t> fov_filter_indices(const RadarScan& scan, const PreprocessConfig& cfg) {
  std::vector<std::size_t> keep;
  keep.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (in_field_of_view(scan.points[i].p, cfg)) keep.push_back(i);
  }
  return keep;
}

RadarScan fov_filter(const RadarScan& scan, const PreprocessConfig& cfg) {
  return select_points(scan, fov_filter_indices(scan, cfg));
}

std::vector<std::size_t> radius_filter_indices(const RadarScan& scan, const PreprocessConfig& cfg) {
  std::vector<Vec3> positions;
  positions.reserve(scan.points.size());
  for (const auto& pt : scan.points) positions.push_back(pt.p);
  const PointGrid grid(positions, cfg.radius_d);

  std::vector<std::size_t> keep;
  keep.reserve(positions.size());
  const auto needed = static_cast<std::size_t>(cfg.radius_n);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    std::size_t count = 0;
    grid.for_each_within(positions[i], cfg.radius_d, [&](std::size_t j, double) {
      if (j != i) ++count;
    });
    if (count >= needed) keep.push_back(i);
  }
  return keep;
}

RadarScan radius_filter(const RadarScan& scan, const PreprocessConfig& cfg) {
  return select_points(scan, radius_filter_indices(scan, cfg));
}

Vec3 radar_velocity(const FrameState& x, const Vec3& gyro, const Extrinsics& ext) {
  const Vec3 body_vel = x.q.conjugate() * x.v + skew(gyro - x.bg) * ext.trans;
  return ext.rot.conjugate() * body_vel;
}

double estimate_doppler(const Vec3& p, const FrameState& x, const Vec3& gyro, const Extrinsics& ext) {
  const double range = p.norm();
  if (!(range > 0.0)) throw std::invalid_argument("estimate_doppler: zero-range point");
  return p.dot(radar_velocity(x, gyro, ext)) / range;
}

VelocityCheckResult velocity_check(const RadarScan& scan, const FrameState& x_pred, const Vec3& gyro,
                                   const Extrinsics& ext, const PreprocessConfig& cfg) {
  VelocityCheckResult res;
  res.static_points.t = scan.t;
  res.rejected.t = scan.t;
  const Vec3 v_radar = radar_velocity(x_pred, gyro, ext);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& pt = scan.points[i];
    const double range = pt.p.norm();
    const bool consistent = range > 0.0 && std::abs(pt.p.dot(v_radar) / range - pt.doppler) <= cfg.vel_threshold;
    if (consistent) {
      res.static_points.points.push_back(pt);
      res.static_indices.push_back(i);
    } else {
      res.rejected.points.push_back(pt);
      res.rejected_indices.push_back(i);
    }
  }
  return res;
}

}  // namespace rio
