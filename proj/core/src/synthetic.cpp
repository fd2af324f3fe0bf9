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

#include "fleetlens/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include "fleetlens/codec.hpp"
#include "fleetlens/errors.hpp"
#include "fleetlens/geo.hpp"

namespace fleetlens {
namespace {

constexpr double kMetersPerDegreeLat = 111'195.0;
constexpr double kGravity = 9.81;

LatLon offset(const LatLon& p, double north_m, double east_m) {
  const double cos_lat = std::cos(p.lat * std::numbers::pi / 180.0);
  return {p.lat + north_m / kMetersPerDegreeLat, p.lon + east_m / (kMetersPerDegreeLat * cos_lat)};
}

LatLon jitter(const LatLon& p, double radius_m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius_m * std::sqrt(u(rng));
  const double a = 2.0 * std::numbers::pi * u(rng);
  return offset(p, r * std::cos(a), r * std::sin(a));
}

struct Leg {
  LatLon from;
  LatLon to;
  double travel_s;
};

}  // namespace

LandmarkDirectory campus_landmarks() {
  return LandmarkDirectory({
      {"Library Crosswalk", 33.77440, -84.39580},
      {"Union Square", 33.77610, -84.39820},
      {"West Campus Housing", 33.77930, -84.40470},
      {"Student Center", 33.77380, -84.39860},
      {"Tech Square", 33.77680, -84.38950},
      {"North Avenue Station", 33.77120, -84.39170},
      {"Stadium Gate", 33.77240, -84.39280},
      {"Science Hall", 33.77760, -84.39700},
  });
}

std::vector<TelemetryRecord> generate_telemetry(const TelemetrySimOptions& o,
                                                const LandmarkDirectory& landmarks) {
  o.profile.validate();
  if (landmarks.size() < 2) throw ConfigurationError("simulation needs at least two landmarks");
  if (o.duration_s <= 0 || o.cruise_speed_mps <= 0 || o.gps_hz <= 0) {
    throw ConfigurationError("simulation durations and rates must be positive");
  }
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const auto& stops = landmarks.entries();
  std::vector<TelemetryRecord> out;
  const auto accel_step_ms = static_cast<std::int64_t>(std::llround(1000.0 / o.profile.frequency_hz));
  const auto gps_step_ms = static_cast<std::int64_t>(std::llround(1000.0 / o.gps_hz));
  const auto end = o.start + static_cast<std::int64_t>(o.duration_s * 1000.0);

  for (std::size_t v = 0; v < o.vehicles.size(); ++v) {
    const std::string& vid = o.vehicles[v];
    std::size_t stop = v % stops.size();
    // Position and longitudinal profile as a function of time since the leg began.
    auto make_leg = [&](std::size_t from) {
      const auto& a = stops[from];
      const auto& b = stops[(from + 1) % stops.size()];
      const double d = haversine_m({a.lat, a.lon}, {b.lat, b.lon});
      return Leg{{a.lat, a.lon}, {b.lat, b.lon}, d / o.cruise_speed_mps + 8.0};
    };
    Leg leg = make_leg(stop);
    double leg_t = 0.0;
    double harsh_left = 0.0;
    double harsh_sign = 1.0;
    LatLon last_pos = leg.from;
    const double harsh_p = o.harsh_events_per_hour / 3600.0 / o.profile.frequency_hz;

    for (TimestampMs t = o.start; t < end; t += accel_step_ms) {
      const double dt = static_cast<double>(accel_step_ms) / 1000.0;
      const double cycle = leg.travel_s + o.stop_dwell_s;
      if (leg_t >= cycle) {
        leg_t -= cycle;
        stop = (stop + 1) % stops.size();
        leg = make_leg(stop);
      }
      const bool moving = leg_t < leg.travel_s;
      double ax = 0.0;
      if (moving) {
        if (leg_t < 4.0) {
          ax = 1.0;
        } else if (leg_t > leg.travel_s - 4.0) {
          ax = -1.2;
        }
        const double frac = std::clamp((leg_t - 4.0) / (leg.travel_s - 8.0), 0.0, 1.0);
        last_pos = {leg.from.lat + (leg.to.lat - leg.from.lat) * frac,
                    leg.from.lon + (leg.to.lon - leg.from.lon) * frac};
        if (harsh_left <= 0.0 && u(rng) < harsh_p) {
          harsh_left = 1.0;
          harsh_sign = u(rng) < 0.5 ? -1.0 : 1.0;
        }
      } else {
        last_pos = leg.to;
      }
      double ay = 0.10 * noise(rng);
      const double spread = moving ? 0.15 : 0.03;
      ax += spread * noise(rng);
      double az = kGravity + (moving ? 0.08 : 0.02) * noise(rng);
      if (harsh_left > 0.0) {
        ax -= 4.5;
        ay += 2.0 * harsh_sign;
        az += 1.5 * noise(rng);
        harsh_left -= dt;
      }
      out.push_back({vid, RawSample{t, ax, ay, az}});

      if ((t - o.start) % gps_step_ms == 0) {
        GpsFix fix{t, last_pos.lat, last_pos.lon, GpsQuality::kFix3d};
        const double r = u(rng);
        if (r < o.gps_dropout_probability) {
          fix.fix_quality = GpsQuality::kNone;
        } else {
          const LatLon p = jitter(last_pos, 1.5, rng);
          fix.lat = p.lat;
          fix.lon = p.lon;
          if (r < o.gps_dropout_probability + 0.05) fix.fix_quality = GpsQuality::kFix2d;
        }
        out.push_back({vid, fix});
      }
      leg_t += dt;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TelemetryRecord& a, const TelemetryRecord& b) {
    auto ts = [](const TelemetryRecord& r) {
      return std::visit([](const auto& p) { return p.timestamp; }, r.payload);
    };
    return ts(a) < ts(b);
  });
  return out;
}

std::array<BehaviorMode, 5> shaped_modes() {
  return {{
      {"Calm", 186, 0.09, 0.02, 10.32, 0.20},
      {"Moderate", 593, 0.16, 0.02, 10.97, 0.20},
      {"Slightly Unstable", 260, 0.24, 0.02, 11.65, 0.20},
      {"Aggressive", 164, 0.48, 0.06, 13.56, 0.50},
      {"Very Aggressive", 16, 5.87, 0.80, 17.98, 0.90},
  }};
}

ShapedDataset generate_shaped_dataset(const std::array<BehaviorMode, 5>& modes,
                                      const LandmarkDirectory& landmarks,
                                      const ShapedDatasetOptions& options) {
  if (options.vehicles.empty()) throw ConfigurationError("need at least one vehicle");
  if (landmarks.empty()) throw ConfigurationError("need at least one landmark");
  std::vector<std::string> labels;
  for (const auto& m : modes) labels.insert(labels.end(), m.count, m.label);
  {
    std::mt19937_64 order(options.seed);
    std::shuffle(labels.begin(), labels.end(), order);
  }
  // Separate stream so the label order does not depend on the feature draws.
  std::mt19937_64 rng(options.seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in_box = [&](double centre, double half) { return centre + half * (2.0 * u(rng) - 1.0); };

  const auto& entries = landmarks.entries();
  auto at = [&](std::size_t i) { return LatLon{entries[i % entries.size()].lat, entries[i % entries.size()].lon}; };
  const std::size_t nv = options.vehicles.size();
  std::vector<LatLon> position(nv, at(0));

  std::vector<std::pair<WindowSummary, std::string>> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t v = i % nv;
    const auto& mode = *std::find_if(modes.begin(), modes.end(),
                                     [&](const BehaviorMode& m) { return m.label == labels[i]; });
    const double instability = std::max(0.0, in_box(mode.instability, mode.instability_halfwidth));
    const double extreme = in_box(mode.extreme, mode.extreme_halfwidth);

    if (mode.label == "Very Aggressive") {
      position[v] = jitter(at(0), 40.0, rng);
    } else if (mode.label == "Aggressive") {
      const double r = u(rng);
      position[v] = jitter(at(r < 0.45 ? 0 : r < 0.8 ? 1 : 4), 60.0, rng);
    } else if (u(rng) < 0.35) {
      // Still at the previous stop.
      position[v] = jitter(position[v], 2.0, rng);
    } else {
      position[v] = jitter(at(static_cast<std::size_t>(u(rng) * entries.size())), 200.0, rng);
    }

    WindowSummary s;
    s.vehicle_id = options.vehicles[v];
    s.window_start = options.start + static_cast<TimestampMs>(i / nv) * 3000;
    s.window_duration_s = 3.0;
    s.mag_mean = kGravity + 0.05 * (2.0 * u(rng) - 1.0);
    s.mag_variance = instability;
    const double px = 0.5 + u(rng);
    const double py = 0.3 + 0.7 * u(rng);
    const double pz = std::sqrt(extreme * extreme - px * px - py * py);
    s.x = {-0.9 * px, -0.4 * px, 0.5 * px, px};
    s.y = {-0.9 * py, -0.4 * py, 0.5 * py, py};
    s.z = {pz - 1.2, pz - 0.9, pz - 0.3, pz};
    s.anchor_lat = position[v].lat;
    s.anchor_lon = position[v].lon;
    s.gps_quality = u(rng) < 0.9 ? GpsQuality::kFix3d : GpsQuality::kFix2d;
    s.sample_count = 60;
    out.emplace_back(quantize_for_wire(s), labels[i]);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.vehicle_id, a.first.window_start) <
           std::tie(b.first.vehicle_id, b.first.window_start);
  });
  ShapedDataset d;
  for (auto& [s, l] : out) {
    d.summaries.push_back(std::move(s));
    d.labels.push_back(std::move(l));
  }
  return d;
}

}  // namespace fleetlens
