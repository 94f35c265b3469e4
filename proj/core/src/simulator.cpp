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

#include "rio/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "rio/preprocess.hpp"

namespace rio::sim {

TrajectoryKind parse_trajectory_kind(const std::string& name) {
  if (name == "circle") return TrajectoryKind::kCircle;
  if (name == "figure8") return TrajectoryKind::kFigure8;
  if (name == "random_smooth") return TrajectoryKind::kRandomSmooth;
  throw std::invalid_argument("unknown trajectory kind '" + name + "'");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kCircle:
      return "circle";
    case TrajectoryKind::kFigure8:
      return "figure8";
    case TrajectoryKind::kRandomSmooth:
      return "random_smooth";
  }
  return "circle";
}

FrameState TrajectorySample::state() const {
  FrameState x;
  x.t = t;
  x.p = p;
  x.q = q;
  x.v = v;
  return x;
}

Trajectory make_trajectory(TrajectoryKind kind, double duration, double speed, double yaw_rate,
                           std::uint64_t seed) {
  if (!(duration > 0.0)) throw std::invalid_argument("trajectory duration must be positive");
  if (speed < 0.0) throw std::invalid_argument("trajectory speed must be non-negative");
  Trajectory tr;
  tr.kind_ = kind;
  tr.duration_ = duration;
  tr.speed_ = speed;
  tr.yaw_rate_ = yaw_rate;
  switch (kind) {
    case TrajectoryKind::kCircle:
      tr.radius_ = yaw_rate != 0.0 ? speed / yaw_rate : 0.0;
      break;
    case TrajectoryKind::kFigure8: {
      // x = A sin(w t), y = A/2 sin(2 w t); speed stays within [A w, sqrt(2) A w].
      tr.frequency_ = std::max(std::abs(yaw_rate), 1e-3) * 0.5;
      tr.radius_ = speed / (1.2 * tr.frequency_);
      break;
    }
    case TrajectoryKind::kRandomSmooth: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double base = std::max(std::abs(yaw_rate), 1e-3);
      for (int k = 0; k < 3; ++k) {
        const double fa = base * (0.5 + unit(rng));
        const double fc = base * (0.5 + unit(rng));
        // Along-track speed stays above speed/2, heading within +-45 deg.
        tr.along_.push_back({speed * unit(rng) / (6.0 * fa), fa, 2.0 * std::numbers::pi * unit(rng)});
        tr.across_.push_back({speed * (0.5 + 0.5 * unit(rng)) / (6.0 * fc), fc, 2.0 * std::numbers::pi * unit(rng)});
      }
      break;
    }
  }
  return tr;
}

void Trajectory::planar(double t, Vec3& p, Vec3& v, Vec3& a) const {
  p.setZero();
  v.setZero();
  a.setZero();
  switch (kind_) {
    case TrajectoryKind::kCircle: {
      if (yaw_rate_ == 0.0) {
        p.x() = speed_ * t;
        v.x() = speed_;
        return;
      }
      const double th = yaw_rate_ * t;
      p << radius_ * std::sin(th), radius_ * (1.0 - std::cos(th)), 0.0;
      v << speed_ * std::cos(th), speed_ * std::sin(th), 0.0;
      a << -speed_ * yaw_rate_ * std::sin(th), speed_ * yaw_rate_ * std::cos(th), 0.0;
      return;
    }
    case TrajectoryKind::kFigure8: {
      const double w = frequency_;
      const double A = radius_;
      p << A * std::sin(w * t), 0.5 * A * std::sin(2.0 * w * t), 0.0;
      v << A * w * std::cos(w * t), A * w * std::cos(2.0 * w * t), 0.0;
      a << -A * w * w * std::sin(w * t), -2.0 * A * w * w * std::sin(2.0 * w * t), 0.0;
      return;
    }
    case TrajectoryKind::kRandomSmooth: {
      p.x() = speed_ * t;
      v.x() = speed_;
      for (const auto& h : along_) {
        const double ph = h.frequency * t + h.phase;
        p.x() += h.amplitude * (std::sin(ph) - std::sin(h.phase));
        v.x() += h.amplitude * h.frequency * std::cos(ph);
        a.x() -= h.amplitude * h.frequency * h.frequency * std::sin(ph);
      }
      for (const auto& h : across_) {
        const double ph = h.frequency * t + h.phase;
        p.y() += h.amplitude * (std::sin(ph) - std::sin(h.phase));
        v.y() += h.amplitude * h.frequency * std::cos(ph);
        a.y() -= h.amplitude * h.frequency * h.frequency * std::sin(ph);
      }
      return;
    }
  }
}

TrajectorySample Trajectory::at(double t) const {
  TrajectorySample s;
  s.t = t;
  if (speed_ == 0.0) return s;
  planar(t, s.p, s.v, s.a);
  const double vx = s.v.x();
  const double vy = s.v.y();
  const double yaw = std::atan2(vy, vx);
  const double yaw_rate = (vx * s.a.y() - vy * s.a.x()) / (vx * vx + vy * vy);
  s.q = UnitQuat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  s.omega = Vec3(0.0, 0.0, yaw_rate);
  return s;
}

bool SensorSimParams::valid() const {
  return scan_rate_hz > 0 && imu_rate_hz > 0 && fov_azimuth > 0 && fov_elevation > 0 && range_max > 0 &&
         sigma_range >= 0 && sigma_angle >= 0 && sigma_doppler >= 0 && sigma_rcs >= 0 && detection_prob >= 0 &&
         detection_prob <= 1 && clutter_rate >= 0 && dynamic_frac >= 0 && dynamic_frac < 1 && sigma_g >= 0 &&
         sigma_a >= 0 && sigma_bg >= 0 && sigma_ba >= 0 && bias_g0 >= 0 && bias_a0 >= 0;
}

SensorSimParams noise_profile(const std::string& name) {
  SensorSimParams p;
  p.ext.rot = quat_from_rpy(0.0, 0.0, 0.0);
  p.ext.trans = Vec3(0.15, 0.0, 0.05);
  if (name == "none") return p;
  if (name == "noisy") {
    p.sigma_range = 0.1;
    p.sigma_angle = 0.5 * std::numbers::pi / 180.0;
    p.sigma_doppler = 0.1;
    p.sigma_rcs = 1.0;
    p.detection_prob = 0.9;
    p.clutter_rate = 5.0;
    p.dynamic_frac = 0.2;
    p.sigma_g = 2e-3;
    p.sigma_a = 2e-2;
    p.sigma_bg = 2e-5;
    p.sigma_ba = 2e-4;
    p.bias_g0 = 5e-3;
    p.bias_a0 = 5e-2;
    return p;
  }
  throw std::invalid_argument("unknown noise profile '" + name + "'");
}

namespace {

PreprocessConfig fov_of(const SensorSimParams& params) {
  PreprocessConfig c;
  c.fov_azimuth = params.fov_azimuth;
  c.fov_elevation = params.fov_elevation;
  c.range_max = params.range_max;
  return c;
}

Pose world_radar(const TrajectorySample& s, const Extrinsics& ext) { return Pose{s.q, s.p} * ext.pose(); }

Vec3 spherical_to_cartesian(double range, double azimuth, double elevation) {
  return range * Vec3(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                      std::sin(elevation));
}

}  // namespace

Scene make_scene(const Trajectory& traj, const SensorSimParams& params, const SceneParams& sp) {
  std::mt19937_64 rng(params.seed * 7919u + 17u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  const double step = 0.5;
  for (double t = 0.0; t <= traj.duration() + 1e-9; t += step) {
    const Vec3 p = traj.at(t).p;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Scene scene;
  scene.lower = Vec3(lo.x() - sp.margin, lo.y() - sp.margin, sp.z_min);
  scene.upper = Vec3(hi.x() + sp.margin, hi.y() + sp.margin, sp.z_max);

  const double area = (scene.upper.x() - scene.lower.x()) * (scene.upper.y() - scene.lower.y());
  const int clusters = std::max(1, static_cast<int>(std::lround(area / sp.area_per_cluster)));
  std::uniform_int_distribution<int> cluster_size(sp.cluster_min, sp.cluster_max);
  long next_id = 0;
  for (int c = 0; c < clusters; ++c) {
    const Vec3 centre(scene.lower.x() + unit(rng) * (scene.upper.x() - scene.lower.x()),
                      scene.lower.y() + unit(rng) * (scene.upper.y() - scene.lower.y()),
                      sp.z_min + sp.cluster_radius + unit(rng) * (sp.z_max - sp.z_min - 2.0 * sp.cluster_radius));
    const int n = cluster_size(rng);
    std::vector<Vec3> members;
    for (int attempt = 0; attempt < 50 * n && static_cast<int>(members.size()) < n; ++attempt) {
      const Vec3 offset(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
      if (offset.norm() > 1.0) continue;
      const Vec3 cand = centre + sp.cluster_radius * offset;
      const bool spaced = std::all_of(members.begin(), members.end(),
                                      [&](const Vec3& m) { return (m - cand).norm() >= sp.min_separation; });
      if (spaced) members.push_back(cand);
    }
    for (const auto& m : members) {
      scene.landmarks.push_back({next_id++, m, sp.rcs_min + unit(rng) * (sp.rcs_max - sp.rcs_min)});
    }
  }

  if (params.dynamic_frac > 0.0) {
    const PreprocessConfig fov = fov_of(params);
    const double lifetime = sp.dynamic_lifetime;
    for (double ts = 0.0; ts < traj.duration(); ts += lifetime) {
      const TrajectorySample s = traj.at(ts);
      const Pose wr = world_radar(s, params.ext);
      const Pose rw = wr.inverse();
      std::size_t visible = 0;
      for (const auto& lm : scene.landmarks) {
        if (in_field_of_view(rw.apply(lm.p), fov)) ++visible;
      }
      const double wanted = params.dynamic_frac / (1.0 - params.dynamic_frac) * params.detection_prob *
                            static_cast<double>(visible);
      const int groups = static_cast<int>(std::ceil(wanted / std::max(1, sp.dynamic_group)));
      for (int g = 0; g < groups; ++g) {
        const double range = 4.0 + unit(rng) * (0.5 * params.range_max - 4.0);
        const double az = (2.0 * unit(rng) - 1.0) * 0.8 * params.fov_azimuth;
        const double el = (2.0 * unit(rng) - 1.0) * 0.5 * params.fov_elevation;
        const Vec3 centre = wr.apply(spherical_to_cartesian(range, az, el));
        Vec3 los = centre - wr.t;
        los.z() = 0.0;
        los.normalize();
        const Vec3 side(-los.y(), los.x(), 0.0);
        const double radial = (1.5 + 1.5 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
        const Vec3 vel = radial * los + (2.0 * unit(rng) - 1.0) * 0.3 * side;
        const double rcs = sp.rcs_min + unit(rng) * (sp.rcs_max - sp.rcs_min);
        for (int k = 0; k < sp.dynamic_group; ++k) {
          const Vec3 offset(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
          scene.dynamic.push_back(
              {centre + 0.3 * offset, vel, ts, ts + lifetime, rcs + (2.0 * unit(rng) - 1.0) * 3.0});
        }
      }
    }
  }
  return scene;
}

std::vector<ImuSample> gen_imu(const Trajectory& traj, const SensorSimParams& params) {
  std::mt19937_64 rng(params.seed * 104729u + 3u);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto nvec = [&]() { return Vec3(normal(rng), normal(rng), normal(rng)); };

  const double dt = 1.0 / params.imu_rate_hz;
  const auto n = static_cast<long>(std::llround(traj.duration() * params.imu_rate_hz));
  Vec3 bg = params.bias_g0 * nvec();
  Vec3 ba = params.bias_a0 * nvec();
  const Vec3 g = params.gravity.vec();

  std::vector<ImuSample> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (long j = 0; j <= n; ++j) {
    const double t = static_cast<double>(j) * dt;
    const TrajectorySample s = traj.at(t);
    ImuSample m;
    m.t = t;
    m.gyro = s.omega + bg + params.sigma_g / std::sqrt(dt) * nvec();
    m.accel = s.q.conjugate() * (s.a + g) + ba + params.sigma_a / std::sqrt(dt) * nvec();
    out.push_back(m);
    bg += params.sigma_bg * std::sqrt(dt) * nvec();
    ba += params.sigma_ba * std::sqrt(dt) * nvec();
  }
  return out;
}

std::string PointLabel::to_string() const {
  switch (kind) {
    case Kind::kStatic:
      return "static:" + std::to_string(landmark_id);
    case Kind::kDynamic:
      return "dynamic";
    case Kind::kClutter:
      return "clutter";
  }
  return "clutter";
}

PointLabel PointLabel::parse(const std::string& text) {
  if (text == "dynamic") return {Kind::kDynamic, -1};
  if (text == "clutter") return {Kind::kClutter, -1};
  if (text.rfind("static:", 0) == 0) {
    std::size_t used = 0;
    const std::string num = text.substr(7);
    const long id = std::stol(num, &used);
    if (used != num.size()) throw std::invalid_argument("bad label '" + text + "'");
    return {Kind::kStatic, id};
  }
  throw std::invalid_argument("bad label '" + text + "'");
}

RadarSimOutput gen_radar(const Trajectory& traj, const Scene& scene, const SensorSimParams& params) {
  std::mt19937_64 rng(params.seed * 15485863u + 11u);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PreprocessConfig fov = fov_of(params);
  const Mat3 Re_t = params.ext.rot.toRotationMatrix().transpose();

  auto measure = [&](const Vec3& p_true) {
    const double range = p_true.norm() + params.sigma_range * normal(rng);
    const double az = std::atan2(p_true.y(), p_true.x()) + params.sigma_angle * normal(rng);
    const double el = std::atan2(p_true.z(), std::hypot(p_true.x(), p_true.y())) + params.sigma_angle * normal(rng);
    return spherical_to_cartesian(range, az, el);
  };

  RadarSimOutput out;
  const auto n_scans = static_cast<long>(std::llround(traj.duration() * params.scan_rate_hz));
  for (long k = 0; k < n_scans; ++k) {
    const double t = static_cast<double>(k) / params.scan_rate_hz;
    const TrajectorySample s = traj.at(t);
    const Pose rw = world_radar(s, params.ext).inverse();
    const Mat3 R_t = s.q.toRotationMatrix().transpose();
    // Radar-origin velocity in the radar frame.
    const Vec3 v_radar = Re_t * (R_t * s.v + s.omega.cross(params.ext.trans));

    std::vector<RadarPoint> pts;
    std::vector<PointLabel> labels;
    for (const auto& lm : scene.landmarks) {
      const Vec3 p = rw.apply(lm.p);
      if (!in_field_of_view(p, fov) || unit(rng) > params.detection_prob) continue;
      RadarPoint rp;
      rp.p = measure(p);
      rp.doppler = p.normalized().dot(v_radar) + params.sigma_doppler * normal(rng);
      rp.rcs = lm.rcs + params.sigma_rcs * normal(rng);
      pts.push_back(rp);
      labels.push_back({PointLabel::Kind::kStatic, lm.id});
    }
    for (const auto& obj : scene.dynamic) {
      if (!obj.alive(t)) continue;
      const Vec3 p = rw.apply(obj.position(t));
      if (!in_field_of_view(p, fov) || unit(rng) > params.detection_prob) continue;
      const Vec3 u = p.normalized();
      const Vec3 v_obj = Re_t * (R_t * obj.v);
      if (std::abs(u.dot(v_obj)) < params.min_dynamic_radial) continue;
      RadarPoint rp;
      rp.p = measure(p);
      rp.doppler = u.dot(v_radar - v_obj) + params.sigma_doppler * normal(rng);
      rp.rcs = obj.rcs + params.sigma_rcs * normal(rng);
      pts.push_back(rp);
      labels.push_back({PointLabel::Kind::kDynamic, -1});
    }
    if (params.clutter_rate > 0.0) {
      std::poisson_distribution<int> clutter(params.clutter_rate);
      const int nc = clutter(rng);
      for (int c = 0; c < nc; ++c) {
        const double range = 1.0 + unit(rng) * (params.range_max - 1.0);
        const double az = (2.0 * unit(rng) - 1.0) * params.fov_azimuth;
        const double el = (2.0 * unit(rng) - 1.0) * params.fov_elevation;
        RadarPoint rp;
        rp.p = spherical_to_cartesian(range, az, el);
        rp.doppler = (2.0 * unit(rng) - 1.0) * 5.0;
        rp.rcs = -20.0 + 30.0 * unit(rng);
        pts.push_back(rp);
        labels.push_back({PointLabel::Kind::kClutter, -1});
      }
    }

    // Seeded shuffle of the detection order.
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    RadarScan scan;
    scan.t = t;
    std::vector<PointLabel> scan_labels;
    scan.points.reserve(pts.size());
    for (const std::size_t i : order) {
      scan.points.push_back(pts[i]);
      scan_labels.push_back(labels[i]);
    }
    out.scans.push_back(std::move(scan));
    out.labels.push_back(std::move(scan_labels));
  }
  return out;
}

SimSequence simulate(TrajectoryKind kind, double duration, double speed, double yaw_rate,
                     const SensorSimParams& params, const SceneParams& scene_params) {
  if (!params.valid()) throw std::invalid_argument("invalid simulation parameters");
  SimSequence seq;
  seq.params = params;
  seq.trajectory = make_trajectory(kind, duration, speed, yaw_rate, params.seed);
  seq.scene = make_scene(seq.trajectory, params, scene_params);
  seq.imu = gen_imu(seq.trajectory, params);
  RadarSimOutput radar = gen_radar(seq.trajectory, seq.scene, params);
  seq.scans = std::move(radar.scans);
  seq.labels = std::move(radar.labels);
  seq.ground_truth.reserve(seq.scans.size());
  for (const auto& scan : seq.scans) seq.ground_truth.push_back(seq.trajectory.at(scan.t));
  return seq;
}

}  // namespace rio::sim
