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

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rio/geom.hpp"
#include "rio/sensor_types.hpp"
#include "rio/spatial_grid.hpp"

namespace rio {

struct AssocConfig {
  double nn_d = 0.5;    // m
  double rcs_d = 3.0;   // dBsm, compared on the stored dB values
  int min_hits = 3;     // consecutive observations before promotion
  bool use_rcs = true;  // false: distance-only neighbour search

  bool valid() const { return nn_d > 0 && rcs_d > 0 && min_hits >= 2; }
};

struct Correspondence {
  std::size_t prev_index = 0;
  std::size_t curr_index = 0;
  double distance = 0.0;
  double rcs_gap = 0.0;
};

/// Applies rel (current radar frame -> previous radar frame) to every point.
std::vector<Vec3> transform_to_prev(const RadarScan& scan, const Pose& rel);

/// Closest previous point satisfying both the distance and the RCS bound.
/// Equal distances resolve to the lowest previous index.
std::optional<Correspondence> rcs_bounded_nn(const Vec3& p, double rcs, std::span<const RadarPoint> prev,
                                             const AssocConfig& cfg);

/// Grid-accelerated version of rcs_bounded_nn over a fixed previous scan.
class ScanIndex {
 public:
  ScanIndex(std::span<const RadarPoint> prev, double cell_size);
  std::optional<Correspondence> nearest(const Vec3& p, double rcs, const AssocConfig& cfg) const;

 private:
  std::vector<double> rcs_;
  PointGrid grid_;
};

/// One-to-one correspondences between consecutive static scans. Each current
/// point proposes its RCS-bounded nearest neighbour; proposals are granted in
/// ascending distance and a previous point can be claimed once.
std::vector<Correspondence> associate_scans(const RadarScan& prev, const RadarScan& curr, const Pose& rel_pose,
                                            const AssocConfig& cfg);

struct TrackObservation {
  long frame = 0;
  std::size_t point_index = 0;
  RadarPoint point;
};

struct Track {
  long id = 0;
  std::vector<TrackObservation> observations;
  double last_rcs = 0.0;
  std::optional<long> landmark_id;

  std::size_t hit_count() const { return observations.size(); }
  long last_frame() const { return observations.back().frame; }
  std::size_t last_index() const { return observations.back().point_index; }
};

/// Tracks alive after the latest frame.
struct TrackSet {
  std::vector<Track> active;
  long next_track_id = 0;
  long next_landmark_id = 0;
  long frame = -1;
};

/// Extends matched tracks with the current observation, opens a track for every
/// unmatched current point and closes tracks that were not matched.
/// Returns the tracks closed by this update.
std::vector<Track> update_tracks(TrackSet& tracks, const std::vector<Correspondence>& matches, long frame,
                                 const RadarScan& curr);

/// Maps an observation to the world frame; nullopt when its frame is no longer known.
using ObservationToWorld = std::function<std::optional<Vec3>(long frame, const Vec3& p_radar)>;

/// Promotes tracks with at least cfg.min_hits observations that have no
/// landmark yet. The landmark starts at the mean world position of the
/// observations `to_world` can place.
std::vector<Landmark> promote(TrackSet& tracks, const AssocConfig& cfg, const ObservationToWorld& to_world);

}  // namespace rio
