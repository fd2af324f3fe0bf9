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

#include "fleetlens/telemetry.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fleetlens/errors.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

bool is_whole(double v) { return std::fabs(v - std::round(v)) < 1e-9; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double number_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw InvalidSampleError(fmt::format("telemetry record: missing numeric '{}'", key));
  }
  return it->get<double>();
}

struct CivilTime {
  int year;
  unsigned month;
  unsigned day;
  int hour;
  int minute;
};

CivilTime civil(TimestampMs t) {
  using namespace std::chrono;
  const sys_time<milliseconds> tp{milliseconds{t}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const auto since_midnight = duration_cast<minutes>(tp - day).count();
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day()), static_cast<int>(since_midnight / 60),
          static_cast<int>(since_midnight % 60)};
}

}  // namespace

std::string_view to_string(GpsQuality q) {
  switch (q) {
    case GpsQuality::kNone: return "none";
    case GpsQuality::kFix2d: return "fix2d";
    case GpsQuality::kFix3d: return "fix3d";
  }
  return "none";
}

GpsQuality parse_gps_quality(std::string_view text) {
  const std::string t = lower(text);
  if (t == "none" || t == "0") return GpsQuality::kNone;
  if (t == "fix2d" || t == "2d" || t == "1") return GpsQuality::kFix2d;
  if (t == "fix3d" || t == "3d" || t == "2") return GpsQuality::kFix3d;
  throw InvalidSampleError(fmt::format("unknown gps fix quality '{}'", text));
}

void SamplingProfile::validate() const {
  if (!(frequency_hz > 0.0) || !(window_seconds > 0.0) || axes <= 0 || bytes_per_reading <= 0 ||
      gps_bytes_per_window < 0) {
    throw InvalidProfileError("sampling profile rates and sizes must be positive");
  }
  if (!is_whole(frequency_hz * window_seconds)) {
    throw InvalidProfileError(
        fmt::format("f x T = {} is not a whole number of samples", frequency_hz * window_seconds));
  }
  if (!is_whole(window_seconds * 1000.0)) {
    throw InvalidProfileError("window duration must be a whole number of milliseconds");
  }
}

std::int64_t SamplingProfile::samples_per_window() const {
  return static_cast<std::int64_t>(std::llround(frequency_hz * window_seconds));
}

std::int64_t SamplingProfile::window_ms() const {
  return static_cast<std::int64_t>(std::llround(window_seconds * 1000.0));
}

double magnitude(double ax, double ay, double az) {
  if (!std::isfinite(ax) || !std::isfinite(ay) || !std::isfinite(az)) {
    throw InvalidSampleError("non-finite acceleration component");
  }
  return std::sqrt(ax * ax + ay * ay + az * az);
}

std::int64_t raw_payload_bytes(const SamplingProfile& profile) {
  profile.validate();
  return profile.samples_per_window() * profile.axes * profile.bytes_per_reading +
         profile.gps_bytes_per_window;
}

bool valid_coordinates(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
         lon >= -180.0 && lon <= 180.0;
}

bool WindowSummary::valid() const {
  const double stats[] = {mag_mean, mag_variance, x.p1, x.p99, y.p1, y.p99, z.p1, z.p99};
  for (double v : stats) {
    if (!std::isfinite(v)) return false;
  }
  return !vehicle_id.empty() && window_duration_s > 0.0 && mag_variance >= 0.0 && x.ordered() &&
         y.ordered() && z.ordered() && valid_coordinates(anchor_lat, anchor_lon) &&
         sample_count >= 0;
}

LandmarkDirectory::LandmarkDirectory(std::vector<Landmark> entries) : entries_(std::move(entries)) {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.name.empty()) throw ConfigurationError("landmark with empty name");
    if (!valid_coordinates(e.lat, e.lon)) {
      throw ConfigurationError(fmt::format("landmark '{}' has invalid coordinates", e.name));
    }
    names.push_back(lower(e.name));
  }
  std::sort(names.begin(), names.end());
  if (auto dup = std::adjacent_find(names.begin(), names.end()); dup != names.end()) {
    throw ConfigurationError(fmt::format("duplicate landmark name '{}'", *dup));
  }
}

LandmarkDirectory LandmarkDirectory::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigurationError(fmt::format("landmark directory is not valid JSON: {}", e.what()));
  }
  if (!j.is_array()) throw ConfigurationError("landmark directory must be a JSON array");
  std::vector<Landmark> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("name") || !item.contains("lat") ||
        !item.contains("lon") || !item["name"].is_string() || !item["lat"].is_number() ||
        !item["lon"].is_number()) {
      throw ConfigurationError("landmark entries need string name and numeric lat/lon");
    }
    out.push_back({item["name"].get<std::string>(), item["lat"].get<double>(),
                   item["lon"].get<double>()});
  }
  return LandmarkDirectory(std::move(out));
}

LandmarkDirectory LandmarkDirectory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open landmark directory " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string LandmarkDirectory::to_json_text() const {
  json arr = json::array();
  for (const auto& e : entries_) arr.push_back({{"name", e.name}, {"lat", e.lat}, {"lon", e.lon}});
  return arr.dump(2);
}

const Landmark* LandmarkDirectory::find(std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& e : entries_) {
    if (lower(e.name) == key) return &e;
  }
  return nullptr;
}

TelemetryRecord parse_telemetry_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InvalidSampleError(fmt::format("telemetry line is not JSON: {}", e.what()));
  }
  if (!j.is_object()) throw InvalidSampleError("telemetry line must be a JSON object");
  auto type = j.find("type");
  auto vehicle = j.find("vehicle");
  auto ts = j.find("ts");
  if (type == j.end() || !type->is_string()) throw InvalidSampleError("missing 'type'");
  if (vehicle == j.end() || !vehicle->is_string()) throw InvalidSampleError("missing 'vehicle'");
  if (ts == j.end() || !ts->is_number_integer()) throw InvalidSampleError("missing integer 'ts'");

  TelemetryRecord rec;
  rec.vehicle_id = vehicle->get<std::string>();
  const auto t = ts->get<TimestampMs>();
  const auto kind = type->get<std::string>();
  if (kind == "accel") {
    RawSample s{t, number_field(j, "ax"), number_field(j, "ay"), number_field(j, "az")};
    magnitude(s);  // rejects non-finite axes
    rec.payload = s;
  } else if (kind == "gps") {
    GpsFix f{t, number_field(j, "lat"), number_field(j, "lon"), GpsQuality::kFix3d};
    if (auto fix = j.find("fix"); fix != j.end()) {
      if (!fix->is_string()) throw InvalidSampleError("'fix' must be a string");
      f.fix_quality = parse_gps_quality(fix->get<std::string>());
    }
    if (!valid_coordinates(f.lat, f.lon)) throw InvalidSampleError("gps fix out of range");
    rec.payload = f;
  } else {
    throw InvalidSampleError(fmt::format("unknown telemetry type '{}'", kind));
  }
  return rec;
}

std::string format_telemetry_line(const TelemetryRecord& record) {
  const json vid = record.vehicle_id;
  if (const auto* s = std::get_if<RawSample>(&record.payload)) {
    return fmt::format(R"({{"type":"accel","vehicle":{},"ts":{},"ax":{:.4f},"ay":{:.4f},"az":{:.4f}}})",
                       vid.dump(), s->timestamp, s->ax, s->ay, s->az);
  }
  const auto& f = std::get<GpsFix>(record.payload);
  return fmt::format(R"({{"type":"gps","vehicle":{},"ts":{},"lat":{:.6f},"lon":{:.6f},"fix":"{}"}})",
                     vid.dump(), f.timestamp, f.lat, f.lon, to_string(f.fix_quality));
}

std::string utc_date(TimestampMs t) {
  const auto c = civil(t);
  return fmt::format("{:04d}-{:02d}-{:02d}", c.year, c.month, c.day);
}

std::string utc_minute(TimestampMs t) {
  const auto c = civil(t);
  return fmt::format("{:04d}-{:02d}-{:02d} {:02d}:{:02d}", c.year, c.month, c.day, c.hour, c.minute);
}

std::string utc_hour_minute(TimestampMs t) {
  const auto c = civil(t);
  return fmt::format("{:02d}:{:02d}", c.hour, c.minute);
}

int utc_hour_of_day(TimestampMs t) { return civil(t).hour; }

std::optional<TimestampMs> parse_timestamp(std::string_view text) {
  static const std::regex kIso(R"((\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2})(?::(\d{2})(?:\.(\d{1,3}))?)?Z)");
  static const std::regex kEpoch(R"(-?\d{1,18})");
  const std::string s(text);
  std::smatch m;
  if (std::regex_match(s, m, kEpoch)) return std::stoll(s);
  if (!std::regex_match(s, m, kIso)) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(m[1])}, month{static_cast<unsigned>(std::stoi(m[2]))},
                           day{static_cast<unsigned>(std::stoi(m[3]))}};
  const int hh = std::stoi(m[4]);
  const int mm = std::stoi(m[5]);
  const int ss = m[6].matched ? std::stoi(m[6]) : 0;
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  std::int64_t ms = 0;
  if (m[7].matched) {
    std::string frac = m[7].str();
    frac.resize(3, '0');
    ms = std::stoll(frac);
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<std::int64_t>(days) * 24 + hh) * 60 + mm) * 60'000LL + ss * 1000LL + ms;
}

}  // namespace fleetlens
