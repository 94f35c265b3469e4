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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rio/geom.hpp"
#include "test_util.hpp"

namespace rio {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Skew, ZeroVectorGivesZeroMatrix) { EXPECT_TRUE(skew(Vec3::Zero()).isZero(0.0)); }

TEST(Skew, MatchesClosedForm) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(skew(Vec3(1, 2, 3)), expected);
}

TEST(Skew, ProductIsCrossProductAndAntisymmetric) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = test::random_vec(rng, 10.0);
    const Vec3 w = test::random_vec(rng, 10.0);
    EXPECT_LE((skew(v) * w - v.cross(w)).norm(), 1e-12);
    EXPECT_TRUE((skew(v) + skew(v).transpose()).isZero(0.0));
  }
}

TEST(QuatMul, IdentityAndInverse) {
  std::mt19937_64 rng(1);
  const UnitQuat q = test::random_quat(rng);
  EXPECT_TRUE(quat_mul(UnitQuat::Identity(), q).coeffs().isApprox(q.coeffs(), 1e-15));
  const UnitQuat e = quat_mul(q, q.conjugate());
  EXPECT_NEAR(std::abs(e.w()), 1.0, 1e-15);
  EXPECT_LE(e.vec().norm(), 1e-15);
}

TEST(QuatMul, NinetyDegreeCompositionMatchesMatrices) {
  const UnitQuat a(Eigen::AngleAxisd(kPi / 2, Vec3::UnitZ()));
  const UnitQuat b(Eigen::AngleAxisd(kPi / 2, Vec3::UnitX()));
  const Mat3 expected = a.toRotationMatrix() * b.toRotationMatrix();
  EXPECT_LE((quat_mul(a, b).toRotationMatrix() - expected).norm(), 1e-12);
}

TEST(QuatMul, RandomProductsMatchMatricesAndStayUnit) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const UnitQuat a = test::random_quat(rng);
    const UnitQuat b = test::random_quat(rng);
    const UnitQuat c = quat_mul(a, b);
    EXPECT_LE(std::abs(c.norm() - 1.0), 1e-9);
    EXPECT_LE((c.toRotationMatrix() - a.toRotationMatrix() * b.toRotationMatrix()).norm(), 1e-12);
  }
}

TEST(QuatRotate, Examples) {
  EXPECT_EQ(quat_rotate(UnitQuat::Identity(), Vec3(1, 2, 3)), Vec3(1, 2, 3));
  const UnitQuat half_turn(Eigen::AngleAxisd(kPi, Vec3::UnitZ()));
  EXPECT_LE((quat_rotate(half_turn, Vec3(1, 0, 0)) - Vec3(-1, 0, 0)).norm(), 1e-15);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const UnitQuat q = test::random_quat(rng);
    const Vec3 v = test::random_vec(rng, 5.0);
    EXPECT_LE((quat_rotate(q, v) - q.toRotationMatrix() * v).norm(), 1e-12);
  }
}

TEST(QuatBoxplus, Examples) {
  std::mt19937_64 rng(4);
  const UnitQuat q = test::random_quat(rng);
  EXPECT_TRUE(quat_boxplus(q, Vec3::Zero()).coeffs().isApprox(q.coeffs(), 1e-15));
  EXPECT_EQ(quat_vec_part(UnitQuat::Identity()), Vec3::Zero());
  const UnitQuat r = quat_boxplus(UnitQuat::Identity(), Vec3(0, 0, kPi / 2));
  EXPECT_NEAR(r.w(), std::cos(kPi / 4), 1e-15);
  EXPECT_NEAR(r.z(), std::sin(kPi / 4), 1e-15);
  EXPECT_NEAR(r.x(), 0.0, 1e-15);
  EXPECT_NEAR(r.y(), 0.0, 1e-15);
}

TEST(QuatBoxplus, SmallAngleVectorPartLinearization) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const UnitQuat q = test::random_quat(rng);
    Vec3 d = test::random_vec(rng, 1.0);
    d *= 1e-3 * std::uniform_real_distribution<double>(0.01, 1.0)(rng) / d.norm();
    const Vec3 rec = 2.0 * quat_vec_part(quat_mul(q.conjugate(), quat_boxplus(q, d)));
    EXPECT_LE((rec - d).norm() / d.norm(), 1e-6);
  }
}

TEST(QuatExpLog, RoundTripIncludingSmallAngles) {
  std::mt19937_64 rng(6);
  for (const double scale : {1e-12, 1e-7, 1e-3, 0.5, 3.0}) {
    for (int i = 0; i < 50; ++i) {
      Vec3 phi = test::random_vec(rng, 1.0);
      phi *= scale / phi.norm();
      EXPECT_LE((quat_log(quat_exp(phi)) - phi).norm(), 1e-12 * std::max(1.0, scale));
      EXPECT_NEAR(quat_exp(phi).norm(), 1.0, 1e-12);
    }
  }
}

TEST(QuatExpJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const Vec3 phi = test::random_vec(rng, 1.5);
    Mat<4, 3> num;
    for (int k = 0; k < 3; ++k) {
      Vec3 d = Vec3::Zero();
      d(k) = 1e-6;
      num.col(k) = (quat_wxyz(quat_exp(phi + d)) - quat_wxyz(quat_exp(phi - d))) / 2e-6;
    }
    EXPECT_LE(test::relative_error(quat_exp_jacobian(phi), num), 1e-8);
  }
}

TEST(QuatLeftRight, MatchHamiltonProduct) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const UnitQuat a = test::random_quat(rng);
    const UnitQuat b = test::random_quat(rng);
    const Vec<4> ab = quat_wxyz(a * b);
    EXPECT_LE((quat_left(a) * quat_wxyz(b) - ab).norm(), 1e-14);
    EXPECT_LE((quat_right(b) * quat_wxyz(a) - ab).norm(), 1e-14);
  }
}

TEST(QuatFromRpy, ComposesZyx) {
  const UnitQuat q = quat_from_rpy(0.1, -0.2, 0.3);
  const Mat3 expected = (Eigen::AngleAxisd(0.3, Vec3::UnitZ()) * Eigen::AngleAxisd(-0.2, Vec3::UnitY()) *
                         Eigen::AngleAxisd(0.1, Vec3::UnitX()))
                            .toRotationMatrix();
  EXPECT_LE((q.toRotationMatrix() - expected).norm(), 1e-14);
}

TEST(Pose, ComposeAndInverse) {
  std::mt19937_64 rng(10);
  const Pose a{test::random_quat(rng), test::random_vec(rng, 3.0)};
  const Pose b{test::random_quat(rng), test::random_vec(rng, 3.0)};
  const Vec3 p = test::random_vec(rng, 3.0);
  EXPECT_LE(((a * b).apply(p) - a.apply(b.apply(p))).norm(), 1e-12);
  EXPECT_LE((a.inverse().apply(a.apply(p)) - p).norm(), 1e-12);
}

}  // namespace
}  // namespace rio
