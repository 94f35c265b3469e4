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

#include "rio/spatial_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace rio {

PointGrid::PointGrid(std::span<const Vec3> points, double cell_size)
    : points_(points.begin(), points.end()), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("PointGrid: cell size must be positive");
  cells_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec3& p = points_[i];
    cells_[key_of(cell_coord(p.x()), cell_coord(p.y()), cell_coord(p.z()))].push_back(static_cast<std::uint32_t>(i));
  }
}

std::int64_t PointGrid::cell_coord(double v) const {
  return static_cast<std::int64_t>(std::floor(v / cell_));
}

PointGrid::Key PointGrid::key_of(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
  // 21 bits per axis, offset to keep coordinates non-negative.
  constexpr std::int64_t kOffset = 1 << 20;
  constexpr std::uint64_t kMask = (1u << 21) - 1u;
  const auto ux = static_cast<std::uint64_t>(ix + kOffset) & kMask;
  const auto uy = static_cast<std::uint64_t>(iy + kOffset) & kMask;
  const auto uz = static_cast<std::uint64_t>(iz + kOffset) & kMask;
  return (ux << 42) | (uy << 21) | uz;
}

}  // namespace rio
