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

#ifndef FLEETLENS_TELEMETRY_HPP_
#define FLEETLENS_TELEMETRY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fleetlens {

// UTC milliseconds since the Unix epoch.
using TimestampMs = std::int64_t;

enum class GpsQuality : std::uint8_t { kNone = 0, kFix2d = 1, kFix3d = 2 };

std::string_view to_string(GpsQuality q);
// Accepts "none", "fix2d", "fix3d" (or "2d"/"3d"). Throws InvalidSampleError.
GpsQuality parse_gps_quality(std::string_view text);

struct RawSample {
  TimestampMs timestamp = 0;
  double ax = 0.0;  // m/s^2
  double ay = 0.0;
  double az = 0.0;

  bool operator==(const RawSample&) const = default;
};

struct GpsFix {
  TimestampMs timestamp = 0;
  double lat = 0.0;  // degrees WGS-84
  double lon = 0.0;
  GpsQuality fix_quality = GpsQuality::kNone;

  bool operator==(const GpsFix&) const = default;
};

// Sensor configuration of one edge device. The defaults are the reference
// bus deployment: 20 Hz accelerometer, 3 s windows, three axes of 8-byte
// readings and three 48-byte GPS fixes per window.
struct SamplingProfile {
  double frequency_hz = 20.0;
  double window_seconds = 3.0;
  int axes = 3;
  int bytes_per_reading = 8;
  int gps_bytes_per_window = 144;

  // Throws InvalidProfileError unless every field is positive and the window
  // holds a whole number of samples and a whole number of milliseconds.
  void validate() const;
  std::int64_t samples_per_window() const;
  std::int64_t window_ms() const;

  bool operator==(const SamplingProfile&) const = default;
};

// Euclidean norm of one accelerometer reading. Throws InvalidSampleError on
// non-finite input.
double magnitude(double ax, double ay, double az);
inline double magnitude(const RawSample& s) { return magnitude(s.ax, s.ay, s.az); }

// Bytes a window would cost if raw samples were transmitted:
// f * T * axes * bytes_per_reading + gps bytes.
std::int64_t raw_payload_bytes(const SamplingProfile& profile);

struct AxisPercentiles {
  double p1 = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;

  bool ordered() const { return p1 <= p10 && p10 <= p90 && p90 <= p99; }
  bool operator==(const AxisPercentiles&) const = default;
};

// The compact per-window packet sent from the edge to the cloud.
struct WindowSummary {
  std::string vehicle_id;
  TimestampMs window_start = 0;
  double window_duration_s = 0.0;
  double mag_mean = 0.0;
  double mag_variance = 0.0;
  AxisPercentiles x;
  AxisPercentiles y;
  AxisPercentiles z;
  double anchor_lat = 0.0;
  double anchor_lon = 0.0;
  GpsQuality gps_quality = GpsQuality::kNone;
  std::int64_t sample_count = 0;

  // Percentile ordering, non-negative variance, valid coordinates.
  bool valid() const;
  bool operator==(const WindowSummary&) const = default;
};

struct Landmark {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const Landmark&) const = default;
};

// Named points of interest used for grounding answers. Names are unique
// ignoring case.
class LandmarkDirectory {
 public:
  LandmarkDirectory() = default;
  // Throws ConfigurationError on duplicate names or invalid coordinates.
  explicit LandmarkDirectory(std::vector<Landmark> entries);

  // Parses a JSON array of {name, lat, lon}.
  static LandmarkDirectory from_json_text(std::string_view text);
  static LandmarkDirectory load(const std::string& path);
  std::string to_json_text() const;

  const std::vector<Landmark>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  // Case-insensitive lookup.
  const Landmark* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

 private:
  std::vector<Landmark> entries_;
};

// One line of the raw telemetry JSONL stream.
struct TelemetryRecord {
  std::string vehicle_id;
  std::variant<RawSample, GpsFix> payload;
};

// Lines look like
//   {"type":"accel","vehicle":"bus-01","ts":1729519200000,"ax":0.1,"ay":0.2,"az":9.8}
//   {"type":"gps","vehicle":"bus-01","ts":1729519200000,"lat":33.77,"lon":-84.39,"fix":"fix3d"}
// Throws InvalidSampleError on anything else.
TelemetryRecord parse_telemetry_line(std::string_view line);
std::string format_telemetry_line(const TelemetryRecord& record);

bool valid_coordinates(double lat, double lon);

// ISO-8601 UTC rendering helpers shared by the store layout and prompts.
std::string utc_date(TimestampMs t);          // 2024-10-21
std::string utc_minute(TimestampMs t);        // 2024-10-21 14:00
std::string utc_hour_minute(TimestampMs t);   // 14:00
int utc_hour_of_day(TimestampMs t);
// Epoch milliseconds, or "YYYY-MM-DDTHH:MM[:SS[.fff]]Z". nullopt otherwise.
std::optional<TimestampMs> parse_timestamp(std::string_view text);

}  // namespace fleetlens

#endif  // FLEETLENS_TELEMETRY_HPP_
