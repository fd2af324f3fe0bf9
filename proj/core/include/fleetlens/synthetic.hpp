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

#ifndef FLEETLENS_SYNTHETIC_HPP_
#define FLEETLENS_SYNTHETIC_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fleetlens/telemetry.hpp"

namespace fleetlens {

// A small campus directory used by the demos, benchmarks and tests.
LandmarkDirectory campus_landmarks();

// 2024-10-21T14:00:00Z
inline constexpr TimestampMs kDemoStart = 1'729'519'200'000;

struct TelemetrySimOptions {
  std::vector<std::string> vehicles{"bus-01"};
  TimestampMs start = kDemoStart;
  double duration_s = 8040.0;  // 2 h 14 min
  SamplingProfile profile;
  double gps_hz = 1.0;
  double cruise_speed_mps = 8.0;
  double stop_dwell_s = 30.0;
  double harsh_events_per_hour = 12.0;
  double gps_dropout_probability = 0.01;
  std::uint64_t seed = 42;
};

// Shuttles looping through the directory's landmarks, stopping at each.
// Records are in timestamp order.
std::vector<TelemetryRecord> generate_telemetry(const TelemetrySimOptions& options,
                                                const LandmarkDirectory& landmarks);

// Behavior mode used to plant a labelled summary dataset: windows are drawn
// uniformly from a box around (instability, extreme magnitude).
struct BehaviorMode {
  std::string label;
  std::size_t count = 0;
  double instability = 0.0;
  double instability_halfwidth = 0.0;
  double extreme = 0.0;
  double extreme_halfwidth = 0.0;
};

// Five modes with a majority-Moderate body and a rare Very Aggressive tail.
// The boxes are disjoint, so a k = 5 fit recovers the planted counts.
std::array<BehaviorMode, 5> shaped_modes();

struct ShapedDatasetOptions {
  std::vector<std::string> vehicles{"bus-01", "bus-02"};
  TimestampMs start = kDemoStart;
  std::uint64_t seed = 42;
};

struct ShapedDataset {
  // Wire-quantized, in (vehicle, window_start) order.
  std::vector<WindowSummary> summaries;
  // Planted label of each summary.
  std::vector<std::string> labels;
};

// Aggressive windows sit near a few hotspot landmarks and some consecutive
// windows repeat a stop position.
ShapedDataset generate_shaped_dataset(const std::array<BehaviorMode, 5>& modes,
                                      const LandmarkDirectory& landmarks,
                                      const ShapedDatasetOptions& options = {});

}  // namespace fleetlens

#endif  // FLEETLENS_SYNTHETIC_HPP_
