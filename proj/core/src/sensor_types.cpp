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

#include "rio/sensor_types.hpp"

#include <cmath>

namespace rio {

std::vector<ScanViolation> validate_scan(const RadarScan& scan) {
  std::vector<ScanViolation> out;
  if (!std::isfinite(scan.t)) out.push_back({0, "non-finite scan timestamp"});
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& pt = scan.points[i];
    if (!pt.p.allFinite()) {
      out.push_back({i, "point " + std::to_string(i) + ": non-finite position"});
    } else if (pt.p.norm() <= 0.0) {
      out.push_back({i, "point " + std::to_string(i) + ": zero range"});
    }
    if (!std::isfinite(pt.doppler)) out.push_back({i, "point " + std::to_string(i) + ": non-finite doppler"});
    if (!std::isfinite(pt.rcs)) out.push_back({i, "point " + std::to_string(i) + ": non-finite rcs"});
  }
  return out;
}

bool state_is_sane(const FrameState& x, double bias_bound) {
  return x.p.allFinite() && x.v.allFinite() && x.q.coeffs().allFinite() &&
         std::abs(x.q.norm() - 1.0) < 1e-6 && x.ba.norm() < bias_bound && x.bg.norm() < bias_bound;
}

}  // namespace rio
