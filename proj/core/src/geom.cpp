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

#include "rio/geom.hpp"

#include <cmath>

namespace rio {

UnitQuat quat_exp(const Vec3& rotvec) {
  const double theta = rotvec.norm();
  const double half = 0.5 * theta;
  double w = 0.0;
  double k = 0.0;
  if (theta < 1e-8) {
    // Taylor expansion of cos(theta/2) and sin(theta/2)/theta.
    w = 1.0 - theta * theta / 8.0;
    k = 0.5 - theta * theta / 48.0;
  } else {
    w = std::cos(half);
    k = std::sin(half) / theta;
  }
  UnitQuat q(w, k * rotvec.x(), k * rotvec.y(), k * rotvec.z());
  q.normalize();
  return q;
}

Vec3 quat_log(const UnitQuat& q_in) {
  UnitQuat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double vn = q.vec().norm();
  if (vn < 1e-12) return 2.0 * q.vec() / q.w();
  const double theta = 2.0 * std::atan2(vn, q.w());
  return theta * q.vec() / vn;
}

Mat<4, 3> quat_exp_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  Mat<4, 3> j;
  if (theta < 1e-6) {
    j.row(0) = -0.25 * phi.transpose();
    j.bottomRows<3>() = 0.5 * Mat3::Identity() - (1.0 / 48.0) * (2.0 * phi * phi.transpose() + phi.squaredNorm() * Mat3::Identity());
    return j;
  }
  const Vec3 u = phi / theta;
  const double s = std::sin(0.5 * theta);
  const double c = std::cos(0.5 * theta);
  j.row(0) = -0.5 * s * u.transpose();
  j.bottomRows<3>() = (s / theta) * Mat3::Identity() + (0.5 * c - s / theta) * u * u.transpose();
  return j;
}

Mat<4, 4> quat_left(const UnitQuat& a) {
  Mat<4, 4> m;
  m(0, 0) = a.w();
  m.block<1, 3>(0, 1) = -a.vec().transpose();
  m.block<3, 1>(1, 0) = a.vec();
  m.block<3, 3>(1, 1) = a.w() * Mat3::Identity() + skew(a.vec());
  return m;
}

Mat<4, 4> quat_right(const UnitQuat& b) {
  Mat<4, 4> m;
  m(0, 0) = b.w();
  m.block<1, 3>(0, 1) = -b.vec().transpose();
  m.block<3, 1>(1, 0) = b.vec();
  m.block<3, 3>(1, 1) = b.w() * Mat3::Identity() - skew(b.vec());
  return m;
}

UnitQuat quat_from_rpy(double roll, double pitch, double yaw) {
  UnitQuat q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
               Eigen::AngleAxisd(roll, Vec3::UnitX());
  q.normalize();
  return q;
}

}  // namespace rio
