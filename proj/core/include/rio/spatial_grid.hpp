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

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rio/geom.hpp"

namespace rio {

/// Uniform hash grid over a fixed point set; answers fixed-radius queries.
class PointGrid {
 public:
  PointGrid(std::span<const Vec3> points, double cell_size);

  /// Calls fn(index, squared_distance) for every point with |p - query| <= radius.
  template <typename Fn>
  void for_each_within(const Vec3& query, double radius, Fn&& fn) const;

  std::size_t size() const { return points_.size(); }

 private:
  using Key = std::uint64_t;
  Key key_of(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;
  std::int64_t cell_coord(double v) const;

  std::vector<Vec3> points_;
  double cell_ = 1.0;
  std::unordered_map<Key, std::vector<std::uint32_t>> cells_;
};

template <typename Fn>
void PointGrid::for_each_within(const Vec3& query, double radius, Fn&& fn) const {
  const double r2 = radius * radius;
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
  const std::int64_t cx = cell_coord(query.x());
  const std::int64_t cy = cell_coord(query.y());
  const std::int64_t cz = cell_coord(query.z());
  for (std::int64_t dx = -reach; dx <= reach; ++dx) {
    for (std::int64_t dy = -reach; dy <= reach; ++dy) {
      for (std::int64_t dz = -reach; dz <= reach; ++dz) {
        const auto it = cells_.find(key_of(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) continue;
        for (const std::uint32_t idx : it->second) {
          const double d2 = (points_[idx] - query).squaredNorm();
          if (d2 <= r2) fn(static_cast<std::size_t>(idx), d2);
        }
      }
    }
  }
}

}  // namespace rio
