/*
 * Copyright 2026 The FleetLens Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fleetlens/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fleetlens/errors.hpp"

namespace fleetlens {

double haversine_m(LatLon a, LatLon b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kDeg;
  const double phi2 = b.lat * kDeg;
  const double dphi = (b.lat - a.lat) * kDeg;
  const double dlambda = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

NearestLandmark nearest_landmark(LatLon p, const LandmarkDirectory& landmarks) {
  if (landmarks.empty()) throw ConfigurationError("landmark directory is empty");
  const Landmark* best = nullptr;
  double best_d = 0.0;
  for (const auto& lm : landmarks.entries()) {
    const double d = haversine_m(p, {lm.lat, lm.lon});
    if (best == nullptr || d < best_d || (d == best_d && lm.name < best->name)) {
      best = &lm;
      best_d = d;
    }
  }
  return {best->name, best_d};
}

}  // namespace fleetlens
