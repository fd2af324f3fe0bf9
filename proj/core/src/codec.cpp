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

#include "fleetlens/codec.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fleetlens/errors.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

double snap(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

AxisPercentiles snap(const AxisPercentiles& p) {
  return {snap(p.p1, kPercentileDecimals), snap(p.p10, kPercentileDecimals),
          snap(p.p90, kPercentileDecimals), snap(p.p99, kPercentileDecimals)};
}

std::string fixed(double v, int decimals) {
  // Avoid "-0.0000" so that equal summaries always encode identically.
  if (snap(v, decimals) == 0.0) v = 0.0;
  return fmt::format("{:.{}f}", v, decimals);
}

std::string axis(const AxisPercentiles& p) {
  return fmt::format("[{},{},{},{}]", fixed(p.p1, kPercentileDecimals),
                     fixed(p.p10, kPercentileDecimals), fixed(p.p90, kPercentileDecimals),
                     fixed(p.p99, kPercentileDecimals));
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw CodecError(key, "missing required key");
  return *it;
}

double number(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw CodecError(key, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) throw CodecError(key, "expected an integer");
  return v.get<std::int64_t>();
}

AxisPercentiles percentiles(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_array() || v.size() != 4) throw CodecError(key, "expected an array of 4 numbers");
  std::array<double, 4> vals{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw CodecError(key, "expected an array of 4 numbers");
    vals[i] = v[i].get<double>();
  }
  AxisPercentiles p{vals[0], vals[1], vals[2], vals[3]};
  if (!p.ordered()) throw CodecError(key, "percentiles must be non-decreasing");
  return p;
}

}  // namespace

std::string encode_summary(const WindowSummary& s) {
  return fmt::format(
      R"({{"vid":{},"ws":{},"wd":{},"mm":{},"mv":{},"px":{},"py":{},"pz":{},"lat":{},"lon":{},"gq":{},"n":{}}})",
      json(s.vehicle_id).dump(), s.window_start, fixed(s.window_duration_s, kDurationDecimals),
      fixed(s.mag_mean, kStatDecimals), fixed(s.mag_variance, kStatDecimals), axis(s.x), axis(s.y),
      axis(s.z), fixed(s.anchor_lat, kCoordinateDecimals), fixed(s.anchor_lon, kCoordinateDecimals),
      static_cast<int>(s.gps_quality), s.sample_count);
}

WindowSummary decode_summary(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw CodecError("<root>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CodecError("<root>", "expected a JSON object");

  WindowSummary s;
  const auto& vid = require(j, "vid");
  if (!vid.is_string() || vid.get<std::string>().empty()) {
    throw CodecError("vid", "expected a non-empty string");
  }
  s.vehicle_id = vid.get<std::string>();
  s.window_start = integer(j, "ws");
  s.window_duration_s = number(j, "wd");
  s.mag_mean = number(j, "mm");
  s.mag_variance = number(j, "mv");
  if (s.mag_variance < 0.0) throw CodecError("mv", "variance must be non-negative");
  s.x = percentiles(j, "px");
  s.y = percentiles(j, "py");
  s.z = percentiles(j, "pz");
  s.anchor_lat = number(j, "lat");
  if (s.anchor_lat < -90.0 || s.anchor_lat > 90.0) throw CodecError("lat", "out of range");
  s.anchor_lon = number(j, "lon");
  if (s.anchor_lon < -180.0 || s.anchor_lon > 180.0) throw CodecError("lon", "out of range");
  const auto gq = integer(j, "gq");
  if (gq < 0 || gq > 2) throw CodecError("gq", "expected 0 (none), 1 (fix2d) or 2 (fix3d)");
  s.gps_quality = static_cast<GpsQuality>(gq);
  s.sample_count = integer(j, "n");
  if (s.sample_count < 0) throw CodecError("n", "must be non-negative");
  return s;
}

WindowSummary quantize_for_wire(const WindowSummary& s) {
  WindowSummary q = s;
  q.window_duration_s = snap(s.window_duration_s, kDurationDecimals);
  q.mag_mean = snap(s.mag_mean, kStatDecimals);
  q.mag_variance = snap(s.mag_variance, kStatDecimals);
  q.x = snap(s.x);
  q.y = snap(s.y);
  q.z = snap(s.z);
  q.anchor_lat = snap(s.anchor_lat, kCoordinateDecimals);
  q.anchor_lon = snap(s.anchor_lon, kCoordinateDecimals);
  return q;
}

std::string shorten_keys(std::string_view json_object) {
  static const std::pair<const char*, const char*> kRenames[] = {
      {"vehicle_id", "vid"},     {"window_start", "ws"},  {"window_duration", "wd"},
      {"mag_mean", "mm"},        {"mag_variance", "mv"},  {"x_percentiles", "px"},
      {"y_percentiles", "py"},   {"z_percentiles", "pz"}, {"anchor_lat", "lat"},
      {"anchor_lon", "lon"},     {"gps_quality", "gq"},   {"sample_count", "n"},
      {"timestamp", "ts"},       {"latitude", "lat"},     {"longitude", "lon"},
  };
  json j = json::parse(json_object);
  if (!j.is_object()) return std::string(json_object);
  json out = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string key = it.key();
    for (const auto& [from, to] : kRenames) {
      if (key == from) {
        key = to;
        break;
      }
    }
    out[key] = it.value();
  }
  return out.dump();
}

}  // namespace fleetlens
