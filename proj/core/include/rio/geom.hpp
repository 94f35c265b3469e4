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

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Hamilton unit quaternion, rotates body-frame vectors into the world frame.
using UnitQuat = Eigen::Quaterniond;

template <int Rows, int Cols>
using Mat = Eigen::Matrix<double, Rows, Cols>;
template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

/// v^ such that skew(v) * w == v.cross(w).
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Hamilton product a * b, renormalized.
inline UnitQuat quat_mul(const UnitQuat& a, const UnitQuat& b) {
  UnitQuat q = a * b;
  q.normalize();
  return q;
}

inline Vec3 quat_rotate(const UnitQuat& q, const Vec3& v) { return q * v; }

inline Vec3 quat_vec_part(const UnitQuat& q) { return q.vec(); }

/// Exponential map from a rotation vector to a unit quaternion.
UnitQuat quat_exp(const Vec3& rotvec);

/// Rotation vector of q (inverse of quat_exp), angle in [0, pi].
Vec3 quat_log(const UnitQuat& q);

/// Right-multiplicative local update q * exp(dtheta).
inline UnitQuat quat_boxplus(const UnitQuat& q, const Vec3& dtheta) {
  return quat_mul(q, quat_exp(dtheta));
}

/// Geodesic angle of a rotation, radians.
inline double rotation_angle(const UnitQuat& q) { return quat_log(q).norm(); }

/// Derivative of the 4-vector (w, x, y, z) of quat_exp(phi) w.r.t. phi.
Mat<4, 3> quat_exp_jacobian(const Vec3& phi);

/// Left-product matrix: (a * b).coeffs_wxyz == quat_left(a) * b_wxyz.
Mat<4, 4> quat_left(const UnitQuat& a);
/// Right-product matrix: (a * b).coeffs_wxyz == quat_right(b) * a_wxyz.
Mat<4, 4> quat_right(const UnitQuat& b);

inline Vec<4> quat_wxyz(const UnitQuat& q) { return {q.w(), q.x(), q.y(), q.z()}; }

/// Rotation from roll, pitch, yaw (Z-Y-X intrinsic).
UnitQuat quat_from_rpy(double roll, double pitch, double yaw);

/// Rigid transform (rotation + translation).
struct Pose {
  UnitQuat q = UnitQuat::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return q * p + t; }
  Pose inverse() const {
    const UnitQuat qi = q.conjugate();
    return {qi, -(qi * t)};
  }
  Pose operator*(const Pose& o) const { return {quat_mul(q, o.q), q * o.t + t}; }
};

}  // namespace rio
