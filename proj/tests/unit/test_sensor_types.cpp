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

#include <limits>

#include "rio/sensor_types.hpp"

namespace rio {
namespace {

RadarScan good_scan() {
  RadarScan s;
  s.t = 1.0;
  s.points = {{Vec3(5, 0, 0), 0.5, 10.0}, {Vec3(3, 1, 0.2), -0.1, 2.0}};
  return s;
}

TEST(ValidateScan, WellFormedScanHasNoViolations) { EXPECT_TRUE(validate_scan(good_scan()).empty()); }

TEST(ValidateScan, ZeroRangePointIsNamed) {
  RadarScan s = good_scan();
  s.points.push_back({Vec3::Zero(), 0.0, 0.0});
  const auto v = validate_scan(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].point_index, 2u);
}

TEST(ValidateScan, NanDopplerIsOneViolation) {
  RadarScan s = good_scan();
  s.points[1].doppler = std::numeric_limits<double>::quiet_NaN();
  const auto v = validate_scan(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].point_index, 1u);
}

TEST(ValidateScan, NonFiniteTimestampIsReported) {
  RadarScan s = good_scan();
  s.t = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(validate_scan(s).empty());
}

TEST(GravityModel, PointsAlongPlusZ) {
  GravityModel g;
  EXPECT_EQ(g.vec(), Vec3(0, 0, 9.81));
}

TEST(StateIsSane, RejectsLargeBiasAndNonUnitQuaternion) {
  FrameState x;
  EXPECT_TRUE(state_is_sane(x));
  x.bg = Vec3(0, 0, 1.5);
  EXPECT_FALSE(state_is_sane(x));
  EXPECT_TRUE(state_is_sane(x, 2.0));
  FrameState y;
  y.q = UnitQuat(2.0, 0.0, 0.0, 0.0);
  EXPECT_FALSE(state_is_sane(y));
}

TEST(Extrinsics, PoseMapsRadarToImu) {
  Extrinsics e;
  e.rot = UnitQuat(Eigen::AngleAxisd(0.5, Vec3::UnitZ()));
  e.trans = Vec3(0.1, 0.2, 0.3);
  const Vec3 p(1, 2, 3);
  EXPECT_LE((e.pose().apply(p) - (e.rot * p + e.trans)).norm(), 1e-15);
}

}  // namespace
}  // namespace rio
