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

#include "rio/imu_preint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rio {

namespace {

struct StepState {
  DeltaState delta;
  Mat<15, 15> jac = Mat<15, 15>::Identity();
  Mat<15, 15> cov = Mat<15, 15>::Zero();
};

// One midpoint step between samples s0 and s1; also propagates the error-state
// Jacobian and covariance with the first-order discrete linearization.
void midpoint_step(StepState& st, const ImuSample& s0, const ImuSample& s1, const ImuBias& bias,
                   const ImuNoiseParams& noise) {
  const double dt = s1.t - s0.t;
  const Vec3 w = 0.5 * (s0.gyro + s1.gyro) - bias.bg;
  const Vec3 acc0 = s0.accel - bias.ba;
  const Vec3 acc1 = s1.accel - bias.ba;

  const UnitQuat q0 = st.delta.dq;
  const UnitQuat q1 = quat_mul(q0, quat_exp(w * dt));
  const Vec3 a = 0.5 * (q0 * acc0 + q1 * acc1);

  st.delta.dp += st.delta.dv * dt + 0.5 * a * dt * dt;
  st.delta.dv += a * dt;
  st.delta.dq = q1;

  const Mat3 I = Mat3::Identity();
  const Mat3 R0 = q0.toRotationMatrix();
  const Mat3 R1 = q1.toRotationMatrix();
  const Mat3 w_x = skew(w);
  const Mat3 a0_x = skew(acc0);
  const Mat3 a1_x = skew(acc1);
  const double dt2 = dt * dt;

  Mat<15, 15> F = Mat<15, 15>::Zero();
  F.block<3, 3>(kP, kP) = I;
  F.block<3, 3>(kP, kR) = -0.25 * R0 * a0_x * dt2 - 0.25 * R1 * a1_x * (I - w_x * dt) * dt2;
  F.block<3, 3>(kP, kV) = I * dt;
  F.block<3, 3>(kP, kBa) = -0.25 * (R0 + R1) * dt2;
  F.block<3, 3>(kP, kBg) = 0.25 * R1 * a1_x * dt2 * dt;
  F.block<3, 3>(kR, kR) = I - w_x * dt;
  F.block<3, 3>(kR, kBg) = -I * dt;
  F.block<3, 3>(kV, kR) = -0.5 * R0 * a0_x * dt - 0.5 * R1 * a1_x * (I - w_x * dt) * dt;
  F.block<3, 3>(kV, kV) = I;
  F.block<3, 3>(kV, kBa) = -0.5 * (R0 + R1) * dt;
  F.block<3, 3>(kV, kBg) = 0.5 * R1 * a1_x * dt2;
  F.block<3, 3>(kBa, kBa) = I;
  F.block<3, 3>(kBg, kBg) = I;

  // Noise inputs: accel/gyro at both ends of the step, then the two random walks.
  Mat<15, 18> V = Mat<15, 18>::Zero();
  V.block<3, 3>(kP, 0) = 0.25 * R0 * dt2;
  V.block<3, 3>(kP, 3) = -0.125 * R1 * a1_x * dt2 * dt;
  V.block<3, 3>(kP, 6) = 0.25 * R1 * dt2;
  V.block<3, 3>(kP, 9) = V.block<3, 3>(kP, 3);
  V.block<3, 3>(kR, 3) = 0.5 * I * dt;
  V.block<3, 3>(kR, 9) = 0.5 * I * dt;
  V.block<3, 3>(kV, 0) = 0.5 * R0 * dt;
  V.block<3, 3>(kV, 3) = -0.25 * R1 * a1_x * dt2;
  V.block<3, 3>(kV, 6) = 0.5 * R1 * dt;
  V.block<3, 3>(kV, 9) = V.block<3, 3>(kV, 3);
  V.block<3, 3>(kBa, 12) = I * dt;
  V.block<3, 3>(kBg, 15) = I * dt;

  // Discrete variances from continuous densities.
  Vec<18> q;
  const double va = noise.sigma_a * noise.sigma_a / dt;
  const double vg = noise.sigma_g * noise.sigma_g / dt;
  const double vba = noise.sigma_ba * noise.sigma_ba / dt;
  const double vbg = noise.sigma_bg * noise.sigma_bg / dt;
  q << va, va, va, vg, vg, vg, va, va, va, vg, vg, vg, vba, vba, vba, vbg, vbg, vbg;

  st.jac = F * st.jac;
  st.cov = F * st.cov * F.transpose() + V * q.asDiagonal() * V.transpose();
  st.cov = 0.5 * (st.cov + st.cov.transpose()).eval();
}

void check_monotone(std::span<const ImuSample> samples) {
  for (std::size_t k = 1; k < samples.size(); ++k) {
    if (!(samples[k].t > samples[k - 1].t)) {
      throw std::invalid_argument("imu timestamps not strictly increasing at sample " + std::to_string(k));
    }
  }
}

}  // namespace

Preintegrated preintegrate(std::span<const ImuSample> samples, const ImuBias& bias_lin,
                           const ImuNoiseParams& noise) {
  if (samples.size() < 2) throw std::invalid_argument("preintegrate needs at least two samples");
  if (!noise.valid()) throw std::invalid_argument("imu noise densities must be positive");
  check_monotone(samples);

  StepState st;
  for (std::size_t k = 1; k < samples.size(); ++k) midpoint_step(st, samples[k - 1], samples[k], bias_lin, noise);

  Preintegrated pre;
  pre.dt = samples.back().t - samples.front().t;
  pre.delta = st.delta;
  pre.cov = st.cov;
  pre.jac_bias.block<3, 3>(0, 0) = st.jac.block<3, 3>(kP, kBa);
  pre.jac_bias.block<3, 3>(0, 3) = st.jac.block<3, 3>(kP, kBg);
  pre.jac_bias.block<3, 3>(3, 0) = st.jac.block<3, 3>(kR, kBa);
  pre.jac_bias.block<3, 3>(3, 3) = st.jac.block<3, 3>(kR, kBg);
  pre.jac_bias.block<3, 3>(6, 0) = st.jac.block<3, 3>(kV, kBa);
  pre.jac_bias.block<3, 3>(6, 3) = st.jac.block<3, 3>(kV, kBg);
  pre.bias_lin = bias_lin;
  pre.noise = noise;
  pre.samples.assign(samples.begin(), samples.end());
  return pre;
}

DeltaState bias_correct(const Preintegrated& pre, const ImuBias& bias_new) {
  const Vec3 dba = bias_new.ba - pre.bias_lin.ba;
  const Vec3 dbg = bias_new.bg - pre.bias_lin.bg;
  DeltaState out;
  out.dp = pre.delta.dp + pre.dp_dba() * dba + pre.dp_dbg() * dbg;
  out.dv = pre.delta.dv + pre.dv_dba() * dba + pre.dv_dbg() * dbg;
  out.dq = quat_mul(pre.delta.dq, quat_exp(pre.dq_dbg() * dbg));
  return out;
}

bool bias_step_exceeds(const Preintegrated& pre, const ImuBias& bias_new, double threshold) {
  return (bias_new.ba - pre.bias_lin.ba).norm() > threshold || (bias_new.bg - pre.bias_lin.bg).norm() > threshold;
}

DeltaState compose(const Preintegrated& a, const Preintegrated& b) {
  DeltaState out;
  out.dp = a.delta.dp + a.delta.dv * b.dt + a.delta.dq * b.delta.dp;
  out.dv = a.delta.dv + a.delta.dq * b.delta.dv;
  out.dq = quat_mul(a.delta.dq, b.delta.dq);
  return out;
}

Vec<15> residual_imu(const FrameState& xi, const FrameState& xj, const Preintegrated& pre,
                     const GravityModel& g, ImuJacobians* jac) {
  const double dt = pre.dt;
  const Vec3 gv = g.vec();
  const ImuBias bias_i{xi.ba, xi.bg};
  const DeltaState corr = bias_correct(pre, bias_i);

  const Mat3 Ri_t = xi.q.toRotationMatrix().transpose();
  const Vec3 pos_term = xj.p - xi.p + 0.5 * gv * dt * dt - xi.v * dt;
  const Vec3 vel_term = xj.v + gv * dt - xi.v;

  // The rotation block compares the state increment against the measured
  // increment: 2 vec(dq^-1 * qi^-1 * qj), zero at the true states.
  const UnitQuat qi_inv_qj = xi.q.conjugate() * xj.q;
  const UnitQuat err = corr.dq.conjugate() * qi_inv_qj;

  Vec<15> r;
  r.segment<3>(kP) = Ri_t * pos_term - corr.dp;
  r.segment<3>(kR) = 2.0 * err.vec();
  r.segment<3>(kV) = Ri_t * vel_term - corr.dv;
  r.segment<3>(kBa) = xj.ba - xi.ba;
  r.segment<3>(kBg) = xj.bg - xi.bg;

  if (jac != nullptr) {
    const Mat3 I = Mat3::Identity();
    auto& Ji = jac->wrt_i;
    auto& Jj = jac->wrt_j;
    Ji.setZero();
    Jj.setZero();

    Ji.block<3, 3>(kP, kP) = -Ri_t;
    Ji.block<3, 3>(kP, kR) = skew(Ri_t * pos_term);
    Ji.block<3, 3>(kP, kV) = -Ri_t * dt;
    Ji.block<3, 3>(kP, kBa) = -pre.dp_dba();
    Ji.block<3, 3>(kP, kBg) = -pre.dp_dbg();

    const UnitQuat dq_inv = corr.dq.conjugate();
    Ji.block<3, 3>(kR, kR) = -(quat_left(dq_inv) * quat_right(qi_inv_qj)).block<3, 3>(1, 1);
    {
      // d/dbg of 2 vec(conj(exp(phi)) * dq_lin^-1 * qi^-1 * qj), phi = J_q_bg * (bg - bg_lin).
      const Vec3 phi = pre.dq_dbg() * (xi.bg - pre.bias_lin.bg);
      const UnitQuat tail = pre.delta.dq.conjugate() * qi_inv_qj;
      Mat<4, 4> conj_sign = Mat<4, 4>::Identity();
      conj_sign.bottomRightCorner<3, 3>() *= -1.0;
      const Mat<4, 3> d = quat_right(tail) * conj_sign * quat_exp_jacobian(phi) * pre.dq_dbg();
      Ji.block<3, 3>(kR, kBg) = 2.0 * d.bottomRows<3>();
    }

    Ji.block<3, 3>(kV, kR) = skew(Ri_t * vel_term);
    Ji.block<3, 3>(kV, kV) = -Ri_t;
    Ji.block<3, 3>(kV, kBa) = -pre.dv_dba();
    Ji.block<3, 3>(kV, kBg) = -pre.dv_dbg();

    Ji.block<3, 3>(kBa, kBa) = -I;
    Ji.block<3, 3>(kBg, kBg) = -I;

    Jj.block<3, 3>(kP, kP) = Ri_t;
    Jj.block<3, 3>(kR, kR) = quat_left(err).block<3, 3>(1, 1);
    Jj.block<3, 3>(kV, kV) = Ri_t;
    Jj.block<3, 3>(kBa, kBa) = I;
    Jj.block<3, 3>(kBg, kBg) = I;
  }
  return r;
}

FrameState propagate(const FrameState& x, std::span<const ImuSample> samples, const GravityModel& g) {
  FrameState out = x;
  if (samples.size() < 2) return out;
  check_monotone(samples);
  const double period = (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
  if (std::abs(samples.front().t - x.t) > 0.5 * period) {
    throw std::invalid_argument("propagate: samples start at " + std::to_string(samples.front().t) +
                                " but state is at " + std::to_string(x.t));
  }
  const Vec3 gv = g.vec();
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const auto& s0 = samples[k - 1];
    const auto& s1 = samples[k];
    const double dt = s1.t - s0.t;
    const Vec3 w = 0.5 * (s0.gyro + s1.gyro) - out.bg;
    const UnitQuat q0 = out.q;
    const UnitQuat q1 = quat_mul(q0, quat_exp(w * dt));
    const Vec3 a = 0.5 * ((q0 * (s0.accel - out.ba) - gv) + (q1 * (s1.accel - out.ba) - gv));
    out.p += out.v * dt + 0.5 * a * dt * dt;
    out.v += a * dt;
    out.q = q1;
  }
  out.t = samples.back().t;
  return out;
}

ImuSample interpolate_imu(const ImuSample& a, const ImuSample& b, double t) {
  const double span = b.t - a.t;
  const double s = span > 0.0 ? std::clamp((t - a.t) / span, 0.0, 1.0) : 0.0;
  return {t, a.gyro + s * (b.gyro - a.gyro), a.accel + s * (b.accel - a.accel)};
}

namespace {

ImuSample sample_at(std::span<const ImuSample> stream, double t) {
  if (t <= stream.front().t) return {t, stream.front().gyro, stream.front().accel};
  if (t >= stream.back().t) return {t, stream.back().gyro, stream.back().accel};
  const auto it = std::lower_bound(stream.begin(), stream.end(), t,
                                   [](const ImuSample& s, double tt) { return s.t < tt; });
  if (it->t == t) return *it;
  return interpolate_imu(*(it - 1), *it, t);
}

}  // namespace

std::vector<ImuSample> slice_imu(std::span<const ImuSample> stream, double t0, double t1) {
  if (stream.empty()) throw std::invalid_argument("slice_imu: empty imu stream");
  std::vector<ImuSample> out;
  out.push_back(sample_at(stream, t0));
  for (const auto& s : stream) {
    if (s.t > t0 && s.t < t1) out.push_back(s);
  }
  if (t1 > t0) out.push_back(sample_at(stream, t1));
  return out;
}

Vec3 gyro_at(std::span<const ImuSample> stream, double t) {
  if (stream.empty()) return Vec3::Zero();
  return sample_at(stream, t).gyro;
}

}  // namespace rio
