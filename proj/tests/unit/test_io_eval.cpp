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
#include <filesystem>
#include <random>

#include "rio/io_eval.hpp"
#include "test_util.hpp"

namespace rio {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rio_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<StampedPose> line_trajectory(std::size_t n) {
  std::vector<StampedPose> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back({0.1 * static_cast<double>(k), Vec3(static_cast<double>(k), 0, 0), UnitQuat::Identity()});
  return out;
}

std::vector<StampedPose> wiggly_trajectory(std::mt19937_64& rng, std::size_t n) {
  std::vector<StampedPose> out;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k);
    out.push_back({0.1 * s, Vec3(s, 3.0 * std::sin(0.3 * s), 0.5 * std::cos(0.2 * s)), test::random_quat(rng)});
  }
  return out;
}

std::vector<StampedPose> transformed(const std::vector<StampedPose>& in, const Pose& T) {
  std::vector<StampedPose> out = in;
  for (auto& s : out) {
    const Pose p = T * s.pose();
    s.p = p.t;
    s.q = p.q;
  }
  return out;
}

TEST(SequenceIo, WriteThenReadIsFieldEqual) {
  sim::SensorSimParams p = sim::noise_profile("noisy");
  p.seed = 3;
  p.dynamic_frac = 0.2;
  p.clutter_rate = 3.0;
  p.ext.rot = UnitQuat(0.99, 0.01, -0.02, 0.1).normalized();
  const auto s = sim::simulate(sim::TrajectoryKind::kFigure8, 3.0, 1.0, 0.2, p);
  Sequence seq = to_sequence(s);
  seq.meta.doppler_sign = -1;
  const fs::path dir = temp_dir("roundtrip");
  write_sequence(dir, seq);
  const Sequence back = read_sequence(dir);
  EXPECT_EQ(back.meta.imu_rate_hz, seq.meta.imu_rate_hz);
  EXPECT_EQ(back.meta.doppler_sign, -1);
  EXPECT_EQ(back.meta.ext.rot.coeffs(), seq.meta.ext.rot.coeffs());
  EXPECT_EQ(back.meta.ext.trans, seq.meta.ext.trans);
  ASSERT_EQ(back.imu.size(), seq.imu.size());
  for (std::size_t i = 0; i < seq.imu.size(); ++i) {
    EXPECT_EQ(back.imu[i].t, seq.imu[i].t);
    EXPECT_EQ(back.imu[i].gyro, seq.imu[i].gyro);
    EXPECT_EQ(back.imu[i].accel, seq.imu[i].accel);
  }
  ASSERT_EQ(back.scans.size(), seq.scans.size());
  for (std::size_t k = 0; k < seq.scans.size(); ++k) {
    EXPECT_EQ(back.scans[k].t, seq.scans[k].t);
    ASSERT_EQ(back.scans[k].points.size(), seq.scans[k].points.size());
    for (std::size_t i = 0; i < seq.scans[k].points.size(); ++i) {
      EXPECT_EQ(back.scans[k].points[i].p, seq.scans[k].points[i].p);
      EXPECT_EQ(back.scans[k].points[i].doppler, seq.scans[k].points[i].doppler);
      EXPECT_EQ(back.scans[k].points[i].rcs, seq.scans[k].points[i].rcs);
    }
  }
  ASSERT_EQ(back.ground_truth.size(), seq.ground_truth.size());
  for (std::size_t k = 0; k < seq.ground_truth.size(); ++k) {
    EXPECT_EQ(back.ground_truth[k].p, seq.ground_truth[k].p);
    EXPECT_EQ(back.ground_truth[k].q.coeffs(), seq.ground_truth[k].q.coeffs());
  }
  EXPECT_EQ(back.labels, seq.labels);
  fs::remove_all(dir);
}

TEST(SequenceIo, ShortImuRowNamesLine) {
  const std::string text = "t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,9.81\n0.005,0,0,0,0,0\n";
  try {
    parse_imu_csv(text, "imu.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), "imu.csv");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("imu.csv:3"), std::string::npos) << e.what();
  }
}

TEST(SequenceIo, RejectsBadRows) {
  EXPECT_THROW(parse_imu_csv("t,wx,wy,wz,ax,ay\n", "imu.csv"), ParseError);
  EXPECT_THROW(parse_imu_csv("t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,x\n", "imu.csv"), ParseError);
  EXPECT_THROW(parse_imu_csv("t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,1\n0,0,0,0,0,0,1\n", "imu.csv"), ParseError);
  EXPECT_THROW(parse_scan_csv("t,x,y,z,doppler,rcs\n0,1,0,0,0,0\n0.1,1,0,0,0,0\n", "s.csv", 0.0), ParseError);
  EXPECT_THROW(parse_gt_csv("t,px,py,pz,qx,qy,qz,qw\n0,0,0,0,0,0,0,0\n", "gt.csv"), ParseError);
  const RadarScan empty = parse_scan_csv("t,x,y,z,doppler,rcs\n", "s.csv", 0.7);
  EXPECT_TRUE(empty.points.empty());
  EXPECT_EQ(empty.t, 0.7);
}

TEST(SequenceIo, OutOfOrderScansAreRejected) {
  const auto s = test::clean_sequence(sim::TrajectoryKind::kCircle, 1.0);
  Sequence seq = to_sequence(s);
  std::swap(seq.scans[3], seq.scans[4]);
  const fs::path dir = temp_dir("order");
  write_sequence(dir, seq);
  try {
    read_sequence(dir);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("increase"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(SequenceIo, MetaAndConfigParsing) {
  const SequenceMeta m = parse_meta("# comment\nimu_rate_hz = 400\ndoppler_sign = -1\next_t = 0.1 0 0.2\n", "meta.txt");
  EXPECT_EQ(m.imu_rate_hz, 400.0);
  EXPECT_EQ(m.doppler_sign, -1);
  EXPECT_EQ(m.ext.trans, Vec3(0.1, 0, 0.2));
  EXPECT_EQ(parse_meta(format_meta(m), "meta.txt").ext.trans, m.ext.trans);
  EXPECT_THROW(parse_meta("doppler_sign = 2\n", "meta.txt"), ParseError);
  EXPECT_THROW(parse_meta("ext_q = 1 1 0 0\n", "meta.txt"), ParseError);
  EXPECT_THROW(parse_meta("bogus = 1\n", "meta.txt"), ParseError);
  EXPECT_THROW(parse_meta("no equals sign\n", "meta.txt"), ParseError);

  OdometryConfig cfg;
  apply_config(cfg, parse_key_values("window_k = 7\nuse_rcs = false\ndisable = imu_residual rcs_filter\n", "c"), "c");
  EXPECT_EQ(cfg.estimator.window_k, 7);
  EXPECT_FALSE(cfg.assoc.use_rcs);
  EXPECT_TRUE(cfg.estimator.ablation.disable_imu_residual);
  EXPECT_TRUE(cfg.estimator.ablation.disable_rcs_filter);
  EXPECT_THROW(apply_config(cfg, parse_key_values("disable = gps\n", "c"), "c"), ParseError);
  EXPECT_THROW(apply_config(cfg, parse_key_values("window_k = 2.5\n", "c"), "c"), ParseError);

  OdometryConfig round;
  apply_config(round, parse_key_values(format_config(cfg), "c"), "c");
  EXPECT_EQ(format_config(round), format_config(cfg));
}

TEST(IntensityToRcs, Examples) {
  EXPECT_NEAR(intensity_to_rcs(2.0, 10.0) - intensity_to_rcs(1.0, 10.0), 3.010, 5e-4);
  EXPECT_NEAR(intensity_to_rcs(1.0, 20.0) - intensity_to_rcs(1.0, 10.0), 12.041, 5e-4);
  EXPECT_NEAR(intensity_to_rcs(16.0, 5.0), intensity_to_rcs(1.0, 10.0), 1e-12);
  EXPECT_THROW(intensity_to_rcs(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(intensity_to_rcs(1.0, -1.0), std::invalid_argument);
}

TEST(IntensityToRcs, DifferencesInvariantToCommonScale) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double i1 = u(rng), i2 = u(rng), r1 = u(rng), r2 = u(rng), k = u(rng);
    const double d = intensity_to_rcs(i1, r1) - intensity_to_rcs(i2, r2);
    EXPECT_NEAR(intensity_to_rcs(k * i1, r1) - intensity_to_rcs(k * i2, r2), d, 1e-10);
  }
}

TEST(Tum, IdentityLine) {
  EXPECT_EQ(export_trajectory_tum({StampedPose{}}), "0.000000000 0 0 0 0 0 0 1\n");
}

TEST(Tum, GoldenFixture) {
  const std::vector<StampedPose> poses = {
      {0.0, Vec3::Zero(), UnitQuat::Identity()},
      {0.1, Vec3(1.5, -2.25, 0.125), UnitQuat(0.8, 0.0, 0.0, 0.6)},
      {0.2, Vec3(3.0, -4.5, 0.25), UnitQuat(0.5, 0.5, 0.5, 0.5)},
  };
  const std::string golden =
      "0.000000000 0 0 0 0 0 0 1\n"
      "0.100000000 1.5 -2.25 0.125 0 0 0.6 0.8\n"
      "0.200000000 3 -4.5 0.25 0.5 0.5 0.5 0.5\n";
  EXPECT_EQ(export_trajectory_tum(poses), golden);
  const auto parsed = parse_trajectory_tum("# timestamp tx ty tz qx qy qz qw\n" + golden, "fixture.tum");
  ASSERT_EQ(parsed.size(), 3u);
  EXPECT_EQ(parsed[1].t, 0.1);
  EXPECT_EQ(parsed[1].p, Vec3(1.5, -2.25, 0.125));
  EXPECT_NEAR(parsed[1].q.z(), 0.6, 1e-15);
  EXPECT_NEAR(parsed[2].q.w(), 0.5, 1e-15);
}

TEST(Tum, RoundTripIsLossless) {
  std::mt19937_64 rng(32);
  std::vector<StampedPose> poses;
  double t = 1e3 * std::uniform_real_distribution<double>(0, 1)(rng);
  for (int i = 0; i < 200; ++i) {
    t += 0.1 + 1e-4 * std::uniform_real_distribution<double>(0, 1)(rng);
    poses.push_back({t, test::random_vec(rng, 100.0), test::random_quat(rng)});
  }
  const auto back = parse_trajectory_tum(export_trajectory_tum(poses), "x.tum");
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_EQ(back[i].t, poses[i].t);
    EXPECT_EQ(back[i].p, poses[i].p);
    EXPECT_EQ(back[i].q.coeffs(), poses[i].q.coeffs());
  }
  EXPECT_THROW(parse_trajectory_tum("0 1 2 3\n", "x.tum"), ParseError);
}

TEST(Ape, IdenticalTrajectoriesGiveZero) {
  std::mt19937_64 rng(33);
  const auto gt = wiggly_trajectory(rng, 50);
  const Metrics m = evaluate_trajectory(gt, gt);
  EXPECT_LE(m.ape_trans_rmse, 1e-12);
  EXPECT_LE(m.ape_rot_rmse, 1e-6);
  EXPECT_EQ(m.rpe_trans_rmse, 0.0);
  EXPECT_LE(m.rpe_rot_rmse, 1e-6);
}

TEST(Ape, UniformOrthogonalShiftIsAlignedAway) {
  const auto gt = line_trajectory(20);
  auto est = gt;
  for (auto& s : est) s.p.y() += 0.1;
  EXPECT_LE(compute_ape(est, gt).ape_trans_rmse, 1e-12);
  EXPECT_NEAR(compute_ape(est, gt, Alignment::kNone).ape_trans_rmse, 0.1, 1e-12);
}

TEST(Ape, AlternatingShiftGivesTenCentimetres) {
  const auto gt = line_trajectory(20);
  auto est = gt;
  const double pattern[4] = {0.1, -0.1, -0.1, 0.1};
  for (std::size_t k = 0; k < est.size(); ++k) est[k].p.y() += pattern[k % 4];
  EXPECT_NEAR(compute_ape(est, gt).ape_trans_rmse, 0.1, 1e-9);
}

TEST(Ape, InvariantToRigidTransformOfEstimate) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const auto gt = wiggly_trajectory(rng, 40);
    auto est = gt;
    for (auto& s : est) {
      s.p += test::random_vec(rng, 0.2);
      s.q = quat_boxplus(s.q, test::random_vec(rng, 0.05));
    }
    const Pose T{test::random_quat(rng), test::random_vec(rng, 50.0)};
    const Metrics a = compute_ape(est, gt);
    const Metrics b = compute_ape(transformed(est, T), gt);
    EXPECT_NEAR(a.ape_trans_rmse, b.ape_trans_rmse, 1e-9);
    EXPECT_NEAR(a.ape_rot_rmse, b.ape_rot_rmse, 1e-9);
  }
}

TEST(Rpe, InvariantToIndependentRigidTransforms) {
  std::mt19937_64 rng(35);
  const auto gt = wiggly_trajectory(rng, 40);
  auto est = gt;
  for (auto& s : est) s.p += test::random_vec(rng, 0.2);
  const Metrics a = compute_rpe(est, gt);
  const Metrics b = compute_rpe(transformed(est, {test::random_quat(rng), test::random_vec(rng, 10.0)}),
                                transformed(gt, {test::random_quat(rng), test::random_vec(rng, 10.0)}));
  EXPECT_NEAR(a.rpe_trans_rmse, b.rpe_trans_rmse, 1e-9);
  EXPECT_NEAR(a.rpe_rot_rmse, b.rpe_rot_rmse, 1e-7);
  EXPECT_GT(a.rpe_trans_rmse, 0.0);
}

TEST(Rpe, HandComputedStep) {
  const auto gt = line_trajectory(5);
  auto est = gt;
  for (std::size_t k = 0; k < est.size(); ++k) est[k].p.x() *= 1.1;
  const Metrics m = compute_rpe(est, gt);
  EXPECT_NEAR(m.rpe_trans_rmse, 0.1, 1e-12);
  EXPECT_EQ(m.rpe_trans.size(), 4u);
}

TEST(Metrics, TooFewPosesThrow) {
  const auto gt = line_trajectory(2);
  EXPECT_THROW(compute_ape(gt, gt), std::invalid_argument);
  EXPECT_THROW(compute_rpe(gt, gt), std::invalid_argument);
  auto far = line_trajectory(10);
  for (auto& s : far) s.t += 100.0;
  EXPECT_THROW(compute_ape(far, line_trajectory(10)), std::invalid_argument);
}

}  // namespace
}  // namespace rio
