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

#ifndef FLEETLENS_GEO_HPP_
#define FLEETLENS_GEO_HPP_

#include <string>

#include "fleetlens/telemetry.hpp"

namespace fleetlens {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_m(LatLon a, LatLon b);

struct NearestLandmark {
  std::string name;
  double distance_m = 0.0;
};

// Haversine argmin over the directory; equal distances resolve to the
// lexicographically smallest name. Throws ConfigurationError when the
// directory is empty.
NearestLandmark nearest_landmark(LatLon p, const LandmarkDirectory& landmarks);

inline LatLon anchor_of(const WindowSummary& s) { return {s.anchor_lat, s.anchor_lon}; }

}  // namespace fleetlens

#endif  // FLEETLENS_GEO_HPP_
