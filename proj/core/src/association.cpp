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

#include "rio/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_map>

namespace rio {

namespace {

bool rcs_ok(double a, double b, const AssocConfig& cfg) { return !cfg.use_rcs || std::abs(a - b) <= cfg.rcs_d; }

std::vector<Vec3> positions_of(std::span<const RadarPoint> pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.p);
  return out;
}

}  // namespace

std::vector<Vec3> transform_to_prev(const RadarScan& scan, const Pose& rel) {
  std::vector<Vec3> out;
  out.reserve(scan.points.size());
  const Mat3 R = rel.q.toRotationMatrix();
  for (const auto& pt : scan.points) out.push_back(R * pt.p + rel.t);
  return out;
}

std::optional<Correspondence> rcs_bounded_nn(const Vec3& p, double rcs, std::span<const RadarPoint> prev,
                                             const AssocConfig& cfg) {
  std::optional<Correspondence> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  const double bound2 = cfg.nn_d * cfg.nn_d;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double d2 = (prev[i].p - p).squaredNorm();
    if (d2 > bound2 || !rcs_ok(prev[i].rcs, rcs, cfg)) continue;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = Correspondence{i, 0, std::sqrt(d2), std::abs(prev[i].rcs - rcs)};
    }
  }
  return best;
}

ScanIndex::ScanIndex(std::span<const RadarPoint> prev, double cell_size)
    : grid_(positions_of(prev), cell_size) {
  rcs_.reserve(prev.size());
  for (const auto& p : prev) rcs_.push_back(p.rcs);
}

std::optional<Correspondence> ScanIndex::nearest(const Vec3& p, double rcs, const AssocConfig& cfg) const {
  std::size_t best_idx = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;
  grid_.for_each_within(p, cfg.nn_d, [&](std::size_t i, double d2) {
    if (!rcs_ok(rcs_[i], rcs, cfg)) return;
    if (!found || d2 < best_d2 || (d2 == best_d2 && i < best_idx)) {
      best_idx = i;
      best_d2 = d2;
      found = true;
    }
  });
  if (!found) return std::nullopt;
  return Correspondence{best_idx, 0, std::sqrt(best_d2), std::abs(rcs_[best_idx] - rcs)};
}

std::vector<Correspondence> associate_scans(const RadarScan& prev, const RadarScan& curr, const Pose& rel_pose,
                                            const AssocConfig& cfg) {
  if (prev.points.empty() || curr.points.empty()) return {};
  const ScanIndex index(prev.points, cfg.nn_d);
  const std::vector<Vec3> moved = transform_to_prev(curr, rel_pose);

  std::vector<Correspondence> proposals;
  proposals.reserve(curr.points.size());
  for (std::size_t j = 0; j < moved.size(); ++j) {
    if (auto c = index.nearest(moved[j], curr.points[j].rcs, cfg)) {
      c->curr_index = j;
      proposals.push_back(*c);
    }
  }
  std::sort(proposals.begin(), proposals.end(), [](const Correspondence& a, const Correspondence& b) {
    return std::tie(a.distance, a.prev_index, a.curr_index) < std::tie(b.distance, b.prev_index, b.curr_index);
  });

  std::vector<bool> claimed(prev.points.size(), false);
  std::vector<Correspondence> out;
  out.reserve(proposals.size());
  for (const auto& c : proposals) {
    if (claimed[c.prev_index]) continue;
    claimed[c.prev_index] = true;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [](const Correspondence& a, const Correspondence& b) { return a.curr_index < b.curr_index; });
  return out;
}

std::vector<Track> update_tracks(TrackSet& tracks, const std::vector<Correspondence>& matches, long frame,
                                 const RadarScan& curr) {
  std::unordered_map<std::size_t, std::size_t> by_prev_index;
  for (std::size_t k = 0; k < tracks.active.size(); ++k) {
    if (tracks.active[k].last_frame() == tracks.frame) by_prev_index.emplace(tracks.active[k].last_index(), k);
  }

  std::vector<bool> extended(tracks.active.size(), false);
  std::vector<bool> curr_used(curr.points.size(), false);
  for (const auto& m : matches) {
    const auto it = by_prev_index.find(m.prev_index);
    if (it == by_prev_index.end() || m.curr_index >= curr.points.size()) continue;
    Track& tr = tracks.active[it->second];
    const RadarPoint& pt = curr.points[m.curr_index];
    tr.observations.push_back({frame, m.curr_index, pt});
    tr.last_rcs = pt.rcs;
    extended[it->second] = true;
    curr_used[m.curr_index] = true;
  }

  std::vector<Track> next;
  std::vector<Track> closed;
  next.reserve(curr.points.size());
  for (std::size_t k = 0; k < tracks.active.size(); ++k) {
    if (extended[k]) {
      next.push_back(std::move(tracks.active[k]));
    } else {
      closed.push_back(std::move(tracks.active[k]));
    }
  }
  for (std::size_t j = 0; j < curr.points.size(); ++j) {
    if (curr_used[j]) continue;
    Track tr;
    tr.id = tracks.next_track_id++;
    tr.observations.push_back({frame, j, curr.points[j]});
    tr.last_rcs = curr.points[j].rcs;
    next.push_back(std::move(tr));
  }
  tracks.active = std::move(next);
  tracks.frame = frame;
  return closed;
}

std::vector<Landmark> promote(TrackSet& tracks, const AssocConfig& cfg, const ObservationToWorld& to_world) {
  std::vector<Landmark> out;
  for (auto& tr : tracks.active) {
    if (tr.landmark_id || tr.hit_count() < static_cast<std::size_t>(cfg.min_hits)) continue;
    Vec3 sum = Vec3::Zero();
    int n = 0;
    for (const auto& obs : tr.observations) {
      if (const auto w = to_world(obs.frame, obs.point.p)) {
        sum += *w;
        ++n;
      }
    }
    if (n == 0) continue;
    Landmark lm;
    lm.id = tracks.next_landmark_id++;
    lm.l = sum / n;
    tr.landmark_id = lm.id;
    out.push_back(lm);
  }
  return out;
}

}  // namespace rio
