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

#include <random>
#include <set>

#include "rio/association.hpp"
#include "rio/preprocess.hpp"
#include "test_util.hpp"

namespace rio {
namespace {

std::optional<Correspondence> brute_nn(const Vec3& p, double rcs, const std::vector<RadarPoint>& prev,
                                       const AssocConfig& cfg) {
  std::optional<Correspondence> best;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double d = (prev[i].p - p).norm();
    const double gap = std::abs(prev[i].rcs - rcs);
    if (d > cfg.nn_d || (cfg.use_rcs && gap > cfg.rcs_d)) continue;
    if (!best || d < best->distance) best = Correspondence{i, 0, d, gap};
  }
  return best;
}

std::vector<RadarPoint> random_points(std::mt19937_64& rng, std::size_t n, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::uniform_real_distribution<double> rcs(-10, 30);
  std::vector<RadarPoint> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({Vec3(u(rng), u(rng), 0.3 * u(rng)), 0.0, rcs(rng)});
  return out;
}

TEST(TransformToPrev, Examples) {
  std::mt19937_64 rng(31);
  RadarScan s;
  s.points = random_points(rng, 20, 10.0);
  const auto same = transform_to_prev(s, Pose{});
  for (std::size_t i = 0; i < same.size(); ++i) EXPECT_EQ(same[i], s.points[i].p);
  const auto shifted = transform_to_prev(s, Pose{UnitQuat::Identity(), Vec3(1, 0, 0)});
  for (std::size_t i = 0; i < shifted.size(); ++i) EXPECT_EQ(shifted[i], s.points[i].p + Vec3(1, 0, 0));
  const Pose rel{test::random_quat(rng), test::random_vec(rng, 3.0)};
  const auto moved = transform_to_prev(s, rel);
  const Mat3 R = rel.q.toRotationMatrix();
  for (std::size_t i = 0; i < moved.size(); ++i) EXPECT_LE((moved[i] - (R * s.points[i].p + rel.t)).norm(), 1e-12);
}

TEST(RcsBoundedNn, Examples) {
  AssocConfig cfg;
  std::vector<RadarPoint> prev = {{Vec3(5, 0, 0), 0, 10.0}};
  EXPECT_FALSE(rcs_bounded_nn(Vec3(6, 0, 0), 10.0, prev, cfg));
  prev = {{Vec3(0.2, 0, 0), 0, 10.0 + cfg.rcs_d + 1.0}};
  EXPECT_FALSE(rcs_bounded_nn(Vec3::Zero(), 10.0, prev, cfg));
  prev = {{Vec3(0.3, 0, 0), 0, 10.5}, {Vec3(0.1, 0, 0), 0, 20.0}};
  const auto m = rcs_bounded_nn(Vec3::Zero(), 10.0, prev, cfg);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->prev_index, 0u);
  EXPECT_NEAR(m->distance, 0.3, 1e-15);
  EXPECT_NEAR(m->rcs_gap, 0.5, 1e-15);
}

TEST(RcsBoundedNn, TieGoesToLowestIndex) {
  AssocConfig cfg;
  const std::vector<RadarPoint> prev = {{Vec3(0, 0.2, 0), 0, 0}, {Vec3(0.2, 0, 0), 0, 0}, {Vec3(0, -0.2, 0), 0, 0}};
  EXPECT_EQ(rcs_bounded_nn(Vec3::Zero(), 0.0, prev, cfg)->prev_index, 0u);
  const ScanIndex index(prev, cfg.nn_d);
  EXPECT_EQ(index.nearest(Vec3::Zero(), 0.0, cfg)->prev_index, 0u);
}

TEST(RcsBoundedNn, LinearAndGridMatchBruteForce) {
  std::mt19937_64 rng(32);
  AssocConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    cfg.use_rcs = trial % 2 == 0;
    const auto prev = random_points(rng, 150, 4.0);
    const ScanIndex index(prev, cfg.nn_d);
    for (const auto& q : random_points(rng, 50, 4.0)) {
      const auto oracle = brute_nn(q.p, q.rcs, prev, cfg);
      const auto lin = rcs_bounded_nn(q.p, q.rcs, prev, cfg);
      const auto grid = index.nearest(q.p, q.rcs, cfg);
      ASSERT_EQ(oracle.has_value(), lin.has_value());
      ASSERT_EQ(oracle.has_value(), grid.has_value());
      if (oracle) {
        EXPECT_EQ(oracle->prev_index, lin->prev_index);
        EXPECT_EQ(oracle->prev_index, grid->prev_index);
        EXPECT_LE(lin->distance, cfg.nn_d);
        if (cfg.use_rcs) EXPECT_LE(lin->rcs_gap, cfg.rcs_d);
      }
    }
  }
}

TEST(RcsBoundedNn, ShrinkingRcsBoundShrinksCandidateSet) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const auto prev = random_points(rng, 100, 3.0);
    const auto q = random_points(rng, 1, 3.0)[0];
    auto candidates = [&](double rcs_d) {
      std::set<std::size_t> out;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        if ((prev[i].p - q.p).norm() <= 0.5 && std::abs(prev[i].rcs - q.rcs) <= rcs_d) out.insert(i);
      }
      return out;
    };
    const auto big = candidates(5.0);
    for (const auto i : candidates(1.0)) EXPECT_TRUE(big.count(i));
    AssocConfig small;
    small.rcs_d = 1.0;
    if (const auto m = rcs_bounded_nn(q.p, q.rcs, prev, small)) EXPECT_TRUE(big.count(m->prev_index));
  }
}

TEST(AssociateScans, IdenticalScansMatchOneToOne) {
  std::mt19937_64 rng(34);
  RadarScan s;
  s.points = random_points(rng, 80, 20.0);
  const auto m = associate_scans(s, s, Pose{}, AssocConfig{});
  ASSERT_EQ(m.size(), s.points.size());
  for (const auto& c : m) EXPECT_EQ(c.prev_index, c.curr_index);
}

TEST(AssociateScans, InjectiveBothWays) {
  std::mt19937_64 rng(35);
  AssocConfig cfg;
  cfg.use_rcs = false;
  for (int trial = 0; trial < 50; ++trial) {
    RadarScan a;
    RadarScan b;
    a.points = random_points(rng, 100, 3.0);
    b.points = random_points(rng, 100, 3.0);
    const auto m = associate_scans(a, b, Pose{}, cfg);
    std::set<std::size_t> prev_used;
    std::set<std::size_t> curr_used;
    for (const auto& c : m) {
      EXPECT_TRUE(prev_used.insert(c.prev_index).second);
      EXPECT_TRUE(curr_used.insert(c.curr_index).second);
      EXPECT_LE(c.distance, cfg.nn_d);
    }
  }
}

TEST(AssociateScans, GroundTruthMotionGivesCorrectMatches) {
  const auto s = test::clean_sequence(sim::TrajectoryKind::kFigure8, 5.0, 5);
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t k = 1; k < s.scans.size(); ++k) {
    const Pose wp = test::gt_state(s, k - 1).pose() * s.params.ext.pose();
    const Pose wc = test::gt_state(s, k).pose() * s.params.ext.pose();
    const auto m = associate_scans(s.scans[k - 1], s.scans[k], wp.inverse() * wc, AssocConfig{});
    for (const auto& c : m) {
      ++total;
      correct += s.labels[k - 1][c.prev_index] == s.labels[k][c.curr_index] ? 1 : 0;
    }
  }
  ASSERT_GT(total, 0u);
  EXPECT_EQ(correct, total);
}

TEST(AssociateScans, RcsResolvesDistanceAmbiguity) {
  std::mt19937_64 rng(36);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AssocConfig cfg;
  const double rcs_noise = 0.5;
  int correct = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    // Two previous points 0.2 m apart whose RCS differ by at least 3 sigma beyond the bound.
    const Vec3 base(10.0 + u(rng), u(rng), 0.0);
    const double rcs_a = 30.0 * u(rng) - 10.0;
    const double rcs_b = rcs_a + (u(rng) < 0.5 ? -1.0 : 1.0) * (cfg.rcs_d + 3.0 * rcs_noise + 2.0 * u(rng));
    RadarScan prev;
    prev.points = {{base, 0, rcs_a}, {base + Vec3(0.2, 0, 0), 0, rcs_b}};
    RadarScan curr;
    const Vec3 jitter = 0.05 * Vec3(noise(rng), noise(rng), 0.0);
    curr.points = {{base + Vec3(0.12, 0, 0) + jitter, 0, rcs_a + rcs_noise * noise(rng)}};
    const auto m = associate_scans(prev, curr, Pose{}, cfg);
    correct += (m.size() == 1 && m[0].prev_index == 0) ? 1 : 0;
  }
  EXPECT_GE(correct, static_cast<int>(0.99 * trials));
}

RadarScan line_scan(std::size_t n) {
  RadarScan s;
  for (std::size_t i = 0; i < n; ++i) s.points.push_back({Vec3(5.0 + i, 0, 0), 0, 0});
  return s;
}

std::vector<Correspondence> identity_matches(std::size_t n) {
  std::vector<Correspondence> m;
  for (std::size_t i = 0; i < n; ++i) m.push_back({i, i, 0.0, 0.0});
  return m;
}

TEST(Tracks, PromotionThreshold) {
  AssocConfig cfg;
  cfg.min_hits = 3;
  TrackSet ts;
  const RadarScan s = line_scan(2);
  const ObservationToWorld to_world = [](long, const Vec3& p) -> std::optional<Vec3> { return p; };
  update_tracks(ts, {}, 0, s);
  update_tracks(ts, identity_matches(2), 1, s);
  EXPECT_TRUE(promote(ts, cfg, to_world).empty());
  update_tracks(ts, identity_matches(2), 2, s);
  const auto lms = promote(ts, cfg, to_world);
  ASSERT_EQ(lms.size(), 2u);
  EXPECT_LE((lms[0].l - Vec3(5, 0, 0)).norm(), 1e-12);
  update_tracks(ts, identity_matches(2), 3, s);
  EXPECT_TRUE(promote(ts, cfg, to_world).empty());
  for (const auto& tr : ts.active) {
    EXPECT_TRUE(tr.landmark_id.has_value());
    EXPECT_EQ(tr.hit_count(), 4u);
  }
}

TEST(Tracks, MissedFrameClosesTrackAndUnmatchedOpenNew) {
  TrackSet ts;
  const RadarScan s = line_scan(3);
  update_tracks(ts, {}, 0, s);
  const auto closed = update_tracks(ts, {{0, 0, 0.0, 0.0}}, 1, s);
  EXPECT_EQ(closed.size(), 2u);
  ASSERT_EQ(ts.active.size(), 3u);
  std::size_t long_tracks = 0;
  for (const auto& tr : ts.active) {
    long_tracks += tr.hit_count() == 2 ? 1 : 0;
    for (std::size_t k = 1; k < tr.observations.size(); ++k) {
      EXPECT_LT(tr.observations[k - 1].frame, tr.observations[k].frame);
    }
  }
  EXPECT_EQ(long_tracks, 1u);
}

TEST(Tracks, PromotedLandmarksAreRealStaticPoints) {
  AssocConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sim::SensorSimParams p = sim::noise_profile("none");
    p.seed = seed;
    p.clutter_rate = 5.0;
    const auto s = sim::simulate(sim::TrajectoryKind::kRandomSmooth, 4.0, 1.0, 0.3, p);
    TrackSet ts;
    std::map<long, std::vector<sim::PointLabel>> track_labels;
    for (std::size_t k = 0; k < s.scans.size(); ++k) {
      std::vector<Correspondence> m;
      if (k > 0) {
        const Pose wp = test::gt_state(s, k - 1).pose() * p.ext.pose();
        const Pose wc = test::gt_state(s, k).pose() * p.ext.pose();
        m = associate_scans(s.scans[k - 1], s.scans[k], wp.inverse() * wc, cfg);
      }
      update_tracks(ts, m, static_cast<long>(k), s.scans[k]);
      const ObservationToWorld to_world = [](long, const Vec3& q) -> std::optional<Vec3> { return q; };
      for (const auto& lm : promote(ts, cfg, to_world)) {
        for (const auto& tr : ts.active) {
          if (tr.landmark_id != lm.id) continue;
          for (const auto& obs : tr.observations) {
            const auto& label = s.labels[static_cast<std::size_t>(obs.frame)][obs.point_index];
            EXPECT_EQ(label.kind, sim::PointLabel::Kind::kStatic) << "seed " << seed;
            EXPECT_EQ(label, s.labels[static_cast<std::size_t>(tr.observations.front().frame)]
                                     [tr.observations.front().point_index]);
          }
        }
      }
    }
  }
}

}  // namespace
}  // namespace rio
