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

#include "rio/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace rio {

bool AblationFlags::set(const std::string& raw) {
  std::string name = raw;
  if (name.rfind("disable_", 0) == 0) name = name.substr(8);
  if (name == "imu_residual") {
    disable_imu_residual = true;
  } else if (name == "doppler_residual") {
    disable_doppler_residual = true;
  } else if (name == "p2p_residual") {
    disable_p2p_residual = true;
  } else if (name == "velocity_filter") {
    disable_velocity_filter = true;
  } else if (name == "rcs_filter") {
    disable_rcs_filter = true;
  } else {
    return false;
  }
  return true;
}

double residual_doppler(const FrameState& x, const RadarPoint& pt, const Vec3& gyro, const Extrinsics& ext,
                        DopplerJacobian* jac) {
  const double range = pt.p.norm();
  if (!(range > 0.0)) throw std::invalid_argument("residual_doppler: zero-range point");
  const Vec3 u = pt.p / range;
  const Mat3 Re_t = ext.rot.toRotationMatrix().transpose();
  const Mat3 Ri_t = x.q.toRotationMatrix().transpose();
  const Vec3 v_body = Ri_t * x.v;
  const Vec3 lever = skew(gyro - x.bg) * ext.trans;
  const double r = u.dot(Re_t * (v_body + lever)) - pt.doppler;
  if (jac != nullptr) {
    const Mat<1, 3> ut_re = u.transpose() * Re_t;
    jac->wrt_frame.setZero();
    jac->wrt_frame.block<1, 3>(0, kR) = ut_re * skew(v_body);
    jac->wrt_frame.block<1, 3>(0, kV) = ut_re * Ri_t;
    jac->wrt_frame.block<1, 3>(0, kBg) = ut_re * skew(ext.trans);
  }
  return r;
}

Vec3 residual_p2p(const FrameState& x, const Landmark& lm, const RadarPoint& pt, const Extrinsics& ext,
                  P2PJacobian* jac) {
  const Vec3 m = ext.rot * pt.p + ext.trans;
  const Mat3 Ri = x.q.toRotationMatrix();
  const Vec3 r = lm.l - (Ri * m + x.p);
  if (jac != nullptr) {
    jac->wrt_frame.setZero();
    jac->wrt_frame.block<3, 3>(0, kP) = -Mat3::Identity();
    jac->wrt_frame.block<3, 3>(0, kR) = Ri * skew(m);
    jac->wrt_landmark = Mat3::Identity();
  }
  return r;
}

std::optional<std::size_t> SlidingWindow::frame_index(long id) const {
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].id == id) return k;
  }
  return std::nullopt;
}

std::size_t Problem::num_params() const {
  if (frames.empty()) return 3 * landmarks.size();
  return static_cast<std::size_t>(frame_dim(0)) + 15 * (frames.size() - 1) + 3 * landmarks.size();
}

Mat<15, 15> imu_sqrt_information(const Preintegrated& pre) {
  const Mat<15, 15> cov = 0.5 * (pre.cov + pre.cov.transpose());
  const Mat<15, 15> info = cov.ldlt().solve(Mat<15, 15>::Identity());
  const Mat<15, 15> info_sym = 0.5 * (info + info.transpose());
  Eigen::LLT<Mat<15, 15>> llt(info_sym);
  if (llt.info() != Eigen::Success) {
    // Fall back to an eigen-decomposition square root with clamped spectrum.
    Eigen::SelfAdjointEigenSolver<Mat<15, 15>> es(info_sym);
    const Vec<15> ev = es.eigenvalues().cwiseMax(1e-12);
    return ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  }
  return llt.matrixU();
}

Problem build_problem(const SlidingWindow& window, const EstimatorConfig& cfg, const Extrinsics& ext,
                      const GravityModel& g) {
  if (window.frames.empty()) throw std::invalid_argument("build_problem: empty window");
  Problem pb;
  pb.ext = ext;
  pb.gravity = g;
  pb.w_doppler = cfg.w_doppler;
  pb.w_p2p = cfg.w_p2p;
  pb.huber_delta = cfg.robust_delta;
  pb.gauge_rot_dof = cfg.ablation.disable_imu_residual ? 0 : 2;

  pb.frames.reserve(window.frames.size());
  for (const auto& f : window.frames) pb.frames.push_back(f.state);

  if (!cfg.ablation.disable_imu_residual) {
    for (std::size_t k = 0; k + 1 < window.frames.size() && k < window.preints.size(); ++k) {
      pb.imu.push_back({k, window.preints[k], imu_sqrt_information(*window.preints[k])});
    }
  }
  if (!cfg.ablation.disable_doppler_residual) {
    for (std::size_t f = 0; f < window.frames.size(); ++f) {
      for (const auto& pt : window.frames[f].static_points.points) {
        if (pt.p.norm() > 0.0) pb.doppler.push_back({f, pt, window.frames[f].gyro});
      }
    }
  }
  if (!cfg.ablation.disable_p2p_residual) {
    std::unordered_map<long, std::size_t> lm_index;
    for (const auto& [id, lm] : window.landmarks) {
      lm_index.emplace(id, pb.landmarks.size());
      pb.landmarks.push_back(lm);
    }
    std::unordered_map<long, std::size_t> frame_index;
    for (std::size_t f = 0; f < window.frames.size(); ++f) frame_index.emplace(window.frames[f].id, f);
    for (const auto& obs : window.observations) {
      const auto fi = frame_index.find(obs.frame_id);
      const auto li = lm_index.find(obs.landmark_id);
      if (fi == frame_index.end() || li == lm_index.end()) continue;
      pb.p2p.push_back({fi->second, li->second, obs.point});
    }
  }
  return pb;
}

double huber_loss(double s, double delta) {
  if (delta <= 0.0 || s <= delta * delta) return s;
  return 2.0 * delta * std::sqrt(s) - delta * delta;
}

namespace {

// d huber / d s.
double huber_weight(double s, double delta) {
  if (delta <= 0.0 || s <= delta * delta) return 1.0;
  return delta / std::sqrt(s);
}

}  // namespace

CostBreakdown evaluate_cost(const Problem& pb) {
  CostBreakdown c;
  for (const auto& f : pb.imu) {
    const Vec<15> r = f.sqrt_info * residual_imu(pb.frames[f.frame_i], pb.frames[f.frame_i + 1], *f.pre, pb.gravity);
    c.imu += r.squaredNorm();
  }
  for (const auto& f : pb.doppler) {
    const double r = residual_doppler(pb.frames[f.frame], f.point, f.gyro, pb.ext);
    c.doppler += pb.w_doppler * r * r;
  }
  for (const auto& f : pb.p2p) {
    const Vec3 r = residual_p2p(pb.frames[f.frame], pb.landmarks[f.landmark], f.point, pb.ext);
    c.p2p += pb.w_p2p * huber_loss(r.squaredNorm(), pb.huber_delta);
  }
  return c;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Maps a frame's full 15-dof increment onto its free parameters.
struct FrameLayout {
  std::vector<int> offset;
  std::vector<MatrixXd> select;  // 15 x dim
  int nx = 0;
};

FrameLayout make_layout(const Problem& pb) {
  FrameLayout lay;
  int off = 0;
  for (std::size_t f = 0; f < pb.frames.size(); ++f) {
    const int d = pb.frame_dim(f);
    MatrixXd S = MatrixXd::Zero(15, d);
    if (f == 0) {
      int col = 0;
      if (pb.gauge_rot_dof == 2) {
        // Body-frame directions orthogonal to world z: roll/pitch only.
        const Vec3 up = pb.frames[0].q.conjugate() * Vec3::UnitZ();
        const Vec3 b1 = up.unitOrthogonal();
        const Vec3 b2 = up.cross(b1).normalized();
        S.block<3, 1>(kR, 0) = b1;
        S.block<3, 1>(kR, 1) = b2;
        col = 2;
      }
      S.block<9, 9>(kV, col) = Mat<9, 9>::Identity();
    } else {
      S = MatrixXd::Identity(15, 15);
    }
    lay.offset.push_back(off);
    lay.select.push_back(std::move(S));
    off += d;
  }
  lay.nx = off;
  return lay;
}

struct Linearization {
  MatrixXd hxx;
  VectorXd gx;
  MatrixXd hxl;
  std::vector<Mat3> hll;
  VectorXd gl;
};

Linearization linearize(const Problem& pb, const FrameLayout& lay) {
  const int nx = lay.nx;
  const int nl = static_cast<int>(pb.landmarks.size());
  Linearization lin;
  lin.hxx = MatrixXd::Zero(nx, nx);
  lin.gx = VectorXd::Zero(nx);
  lin.hxl = MatrixXd::Zero(nx, 3 * nl);
  lin.hll.assign(static_cast<std::size_t>(nl), Mat3::Zero());
  lin.gl = VectorXd::Zero(3 * nl);

  auto add_frame_pair = [&](std::size_t a, const MatrixXd& Ja, std::size_t b, const MatrixXd& Jb, const VectorXd& r) {
    const int oa = lay.offset[a];
    const int ob = lay.offset[b];
    lin.hxx.block(oa, oa, Ja.cols(), Ja.cols()).noalias() += Ja.transpose() * Ja;
    lin.hxx.block(ob, ob, Jb.cols(), Jb.cols()).noalias() += Jb.transpose() * Jb;
    const MatrixXd cross = Ja.transpose() * Jb;
    lin.hxx.block(oa, ob, Ja.cols(), Jb.cols()) += cross;
    lin.hxx.block(ob, oa, Jb.cols(), Ja.cols()) += cross.transpose();
    lin.gx.segment(oa, Ja.cols()).noalias() += Ja.transpose() * r;
    lin.gx.segment(ob, Jb.cols()).noalias() += Jb.transpose() * r;
  };

  for (const auto& f : pb.imu) {
    ImuJacobians J;
    const Vec<15> r = residual_imu(pb.frames[f.frame_i], pb.frames[f.frame_i + 1], *f.pre, pb.gravity, &J);
    const VectorXd rw = f.sqrt_info * r;
    const MatrixXd Ja = f.sqrt_info * J.wrt_i * lay.select[f.frame_i];
    const MatrixXd Jb = f.sqrt_info * J.wrt_j * lay.select[f.frame_i + 1];
    add_frame_pair(f.frame_i, Ja, f.frame_i + 1, Jb, rw);
  }

  const double sw_d = std::sqrt(pb.w_doppler);
  for (const auto& f : pb.doppler) {
    DopplerJacobian J;
    const double r = residual_doppler(pb.frames[f.frame], f.point, f.gyro, pb.ext, &J);
    const MatrixXd Ja = sw_d * J.wrt_frame * lay.select[f.frame];
    const int oa = lay.offset[f.frame];
    lin.hxx.block(oa, oa, Ja.cols(), Ja.cols()).noalias() += Ja.transpose() * Ja;
    lin.gx.segment(oa, Ja.cols()).noalias() += Ja.transpose() * (sw_d * r);
  }

  const double sw_p = std::sqrt(pb.w_p2p);
  for (const auto& f : pb.p2p) {
    P2PJacobian J;
    const Vec3 r = residual_p2p(pb.frames[f.frame], pb.landmarks[f.landmark], f.point, pb.ext, &J);
    const double rho = std::sqrt(huber_weight(r.squaredNorm(), pb.huber_delta));
    const double s = sw_p * rho;
    const Vec3 rw = s * r;
    const MatrixXd Ja = s * J.wrt_frame * lay.select[f.frame];
    const Mat3 Jl = s * J.wrt_landmark;
    const int oa = lay.offset[f.frame];
    const int ol = 3 * static_cast<int>(f.landmark);
    lin.hxx.block(oa, oa, Ja.cols(), Ja.cols()).noalias() += Ja.transpose() * Ja;
    lin.gx.segment(oa, Ja.cols()).noalias() += Ja.transpose() * rw;
    lin.hxl.block(oa, ol, Ja.cols(), 3).noalias() += Ja.transpose() * Jl;
    lin.hll[f.landmark].noalias() += Jl.transpose() * Jl;
    lin.gl.segment<3>(ol).noalias() += Jl.transpose() * rw;
  }
  return lin;
}

double damping_of(double diag) { return std::clamp(diag, 1e-6, 1e32); }

// Solves the damped normal equations with the landmarks eliminated.
bool solve_step(const Linearization& lin, double lambda, VectorXd& dx, VectorXd& dl) {
  const int nx = static_cast<int>(lin.gx.size());
  const int nl = static_cast<int>(lin.hll.size());
  MatrixXd S = lin.hxx;
  for (int i = 0; i < nx; ++i) S(i, i) += lambda * damping_of(lin.hxx(i, i));
  VectorXd b = -lin.gx;

  std::vector<Mat3> inv(static_cast<std::size_t>(nl));
  for (int l = 0; l < nl; ++l) {
    Mat3 A = lin.hll[l];
    for (int i = 0; i < 3; ++i) A(i, i) += lambda * damping_of(lin.hll[l](i, i));
    inv[l] = A.inverse();
    if (nx > 0) {
      const MatrixXd W = lin.hxl.block(0, 3 * l, nx, 3);
      const MatrixXd WAinv = W * inv[l];
      S.noalias() -= WAinv * W.transpose();
      b.noalias() += WAinv * lin.gl.segment<3>(3 * l);
    }
  }

  dx = VectorXd::Zero(nx);
  if (nx > 0) {
    Eigen::LDLT<MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success) return false;
    dx = ldlt.solve(b);
    if (!dx.allFinite()) return false;
  }
  dl = VectorXd::Zero(3 * nl);
  for (int l = 0; l < nl; ++l) {
    Vec3 rhs = -lin.gl.segment<3>(3 * l);
    if (nx > 0) rhs.noalias() -= lin.hxl.block(0, 3 * l, nx, 3).transpose() * dx;
    dl.segment<3>(3 * l) = inv[l] * rhs;
  }
  return dl.allFinite();
}

void apply_step(Problem& pb, const FrameLayout& lay, const VectorXd& dx, const VectorXd& dl) {
  for (std::size_t f = 0; f < pb.frames.size(); ++f) {
    const Vec<15> d = lay.select[f] * dx.segment(lay.offset[f], pb.frame_dim(f));
    FrameState& s = pb.frames[f];
    s.p += d.segment<3>(kP);
    s.q = quat_boxplus(s.q, d.segment<3>(kR));
    s.v += d.segment<3>(kV);
    s.ba += d.segment<3>(kBa);
    s.bg += d.segment<3>(kBg);
  }
  for (std::size_t l = 0; l < pb.landmarks.size(); ++l) pb.landmarks[l].l += dl.segment<3>(3 * static_cast<int>(l));
}

}  // namespace

SolveReport solve(Problem& pb, const EstimatorConfig& cfg) {
  SolveReport rep;
  const std::vector<FrameState> frames0 = pb.frames;
  const std::vector<Landmark> landmarks0 = pb.landmarks;

  double cost = evaluate_cost(pb).total();
  rep.initial_cost = cost;
  rep.final_cost = cost;
  if (!std::isfinite(cost)) {
    rep.diverged = true;
    return rep;
  }
  constexpr double kNegligibleCost = 1e-20;
  if (cost <= kNegligibleCost || pb.num_factors() == 0) {
    rep.converged = true;
    return rep;
  }

  double lambda = cfg.lm_lambda_init;
  bool relinearize = true;
  FrameLayout lay;
  Linearization lin;
  for (int it = 0; it < cfg.max_iters; ++it) {
    rep.iterations = it + 1;
    if (relinearize) {
      lay = make_layout(pb);
      lin = linearize(pb, lay);
      relinearize = false;
    }
    Eigen::VectorXd dx;
    Eigen::VectorXd dl;
    if (!solve_step(lin, lambda, dx, dl)) {
      lambda *= 10.0;
      continue;
    }

    Problem trial = pb;
    apply_step(trial, lay, dx, dl);
    const double new_cost = evaluate_cost(trial).total();
    if (!std::isfinite(new_cost)) {
      pb.frames = frames0;
      pb.landmarks = landmarks0;
      rep.diverged = true;
      rep.final_cost = rep.initial_cost;
      return rep;
    }
    if (new_cost < cost) {
      const double rel = (cost - new_cost) / cost;
      pb.frames = std::move(trial.frames);
      pb.landmarks = std::move(trial.landmarks);
      cost = new_cost;
      rep.accepted_costs.push_back(cost);
      lambda = std::max(lambda / 10.0, 1e-12);
      relinearize = true;
      if (rel < cfg.rel_tol || cost <= kNegligibleCost) {
        rep.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        rep.converged = true;
        break;
      }
    }
  }
  rep.final_cost = cost;
  return rep;
}

void write_back(const Problem& pb, SlidingWindow& window) {
  for (std::size_t f = 0; f < pb.frames.size() && f < window.frames.size(); ++f) {
    window.frames[f].state = pb.frames[f];
  }
  for (const auto& lm : pb.landmarks) {
    const auto it = window.landmarks.find(lm.id);
    if (it != window.landmarks.end()) it->second = lm;
  }
}

bool slide_window(SlidingWindow& window, const EstimatorConfig& cfg) {
  if (static_cast<int>(window.frames.size()) < cfg.window_k) return false;
  const long dropped = window.frames.front().id;
  window.frames.pop_front();
  if (!window.preints.empty()) window.preints.pop_front();
  std::erase_if(window.observations, [dropped](const P2PObservation& o) { return o.frame_id == dropped; });
  std::unordered_map<long, int> seen;
  for (const auto& o : window.observations) ++seen[o.landmark_id];
  std::erase_if(window.landmarks, [&](const auto& kv) { return seen.find(kv.first) == seen.end(); });
  return true;
}

std::optional<Vec3> ego_velocity_ls(std::span<const RadarPoint> points) {
  if (points.size() < 3) return std::nullopt;
  Eigen::MatrixXd U(static_cast<int>(points.size()), 3);
  Eigen::VectorXd d(static_cast<int>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double range = points[i].p.norm();
    if (!(range > 0.0)) return std::nullopt;
    U.row(static_cast<int>(i)) = (points[i].p / range).transpose();
    d(static_cast<int>(i)) = points[i].doppler;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(2) <= 1e-6 * sv(0)) return std::nullopt;
  return Vec3(svd.solve(d));
}

InitResult initialize(const RadarScan& scan, std::span<const ImuSample> imu, const Extrinsics& ext,
                      const PreprocessConfig& pre_cfg) {
  InitResult res;
  res.state.t = scan.t;

  Vec3 gyro = Vec3::Zero();
  if (!imu.empty()) {
    Vec3 acc = Vec3::Zero();
    for (const auto& s : imu) acc += s.accel;
    acc /= static_cast<double>(imu.size());
    const double roll = std::atan2(acc.y(), acc.z());
    const double pitch = std::atan2(-acc.x(), std::hypot(acc.y(), acc.z()));
    res.state.q = quat_from_rpy(roll, pitch, 0.0);
    gyro = gyro_at(imu, scan.t);
  } else {
    res.degraded = true;
  }

  const RadarScan filtered = radius_filter(fov_filter(scan, pre_cfg), pre_cfg);
  std::vector<RadarPoint> pts = filtered.points;
  auto v_radar = ego_velocity_ls(pts);
  if (!v_radar) {
    res.degraded = true;
    return res;
  }
  // Moving targets bias a plain fit; refit on the points consistent with it.
  for (int round = 0; round < 5; ++round) {
    std::vector<RadarPoint> inliers;
    double scale = 0.0;
    for (const auto& pt : pts) scale = std::max(scale, std::abs(pt.p.normalized().dot(*v_radar) - pt.doppler));
    const double thr = std::max(pre_cfg.vel_threshold, 0.5 * scale);
    for (const auto& pt : pts) {
      if (std::abs(pt.p.normalized().dot(*v_radar) - pt.doppler) <= thr) inliers.push_back(pt);
    }
    if (inliers.size() == pts.size() || inliers.size() < 3) break;
    const auto refit = ego_velocity_ls(inliers);
    if (!refit) break;
    v_radar = refit;
    pts = std::move(inliers);
  }

  const Vec3 v_body = ext.rot * *v_radar - skew(gyro) * ext.trans;
  res.state.v = res.state.q * v_body;
  return res;
}

}  // namespace rio
