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

#include "fleetlens/edge_aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <tuple>
#include <variant>

#include "fleetlens/codec.hpp"
#include "fleetlens/errors.hpp"

namespace fleetlens {
namespace {

AxisPercentiles axis_percentiles(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return {percentile_sorted(values, 1.0), percentile_sorted(values, 10.0),
          percentile_sorted(values, 90.0), percentile_sorted(values, 99.0)};
}

}  // namespace

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyWindowError("percentile of an empty window");
  if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("percentile rank must be in (0, 100)");
  const auto n = static_cast<double>(sorted.size());
  // p * n first: for integral p and n the product is exact, so ranks that
  // land on a whole index do not get pushed up by rounding.
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double percentile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, p);
}

std::int64_t window_index(TimestampMs t, std::int64_t window_ms) {
  auto q = t / window_ms;
  if (t % window_ms != 0 && t < 0) --q;
  return q;
}

WindowSummary close_window(const WindowAccumulator& acc, const SamplingProfile& profile) {
  if (acc.samples.empty()) {
    throw EmptyWindowError("window " + std::to_string(acc.window_start) + " of " + acc.vehicle_id +
                           " has no accelerometer samples");
  }
  const std::size_t n = acc.samples.size();
  std::vector<double> mags(n), xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = acc.samples[i];
    mags[i] = magnitude(s);
    xs[i] = s.ax;
    ys[i] = s.ay;
    zs[i] = s.az;
  }

  // Two-pass population statistics. Summing offsets from the first sample
  // keeps a constant series exact.
  const double shift = mags[0];
  double sum = 0.0;
  for (double m : mags) sum += m - shift;
  const double mean = shift + sum / static_cast<double>(n);
  double ss = 0.0;
  for (double m : mags) ss += (m - mean) * (m - mean);

  WindowSummary out;
  out.vehicle_id = acc.vehicle_id;
  out.window_start = acc.window_start;
  out.window_duration_s = profile.window_seconds;
  out.mag_mean = mean;
  out.mag_variance = ss / static_cast<double>(n);
  out.x = axis_percentiles(xs);
  out.y = axis_percentiles(ys);
  out.z = axis_percentiles(zs);
  out.sample_count = static_cast<std::int64_t>(n);

  const GpsFix* anchor = nullptr;
  for (const auto& f : acc.fixes) {
    if (f.fix_quality == GpsQuality::kNone) continue;
    if (anchor == nullptr || f.fix_quality > anchor->fix_quality ||
        (f.fix_quality == anchor->fix_quality && f.timestamp >= anchor->timestamp)) {
      anchor = &f;
    }
  }
  if (anchor != nullptr) {
    out.anchor_lat = anchor->lat;
    out.anchor_lon = anchor->lon;
    out.gps_quality = anchor->fix_quality;
  }
  return out;
}

ReductionReport make_reduction_report(std::span<const WindowSummary> summaries,
                                      const SamplingProfile& profile) {
  ReductionReport r;
  r.windows = static_cast<std::int64_t>(summaries.size());
  r.raw_bytes_projected = r.windows * raw_payload_bytes(profile);
  for (const auto& s : summaries) {
    const auto bytes = static_cast<std::int64_t>(encode_summary(s).size());
    r.aggregated_bytes += bytes;
    r.max_packet_bytes = std::max(r.max_packet_bytes, bytes);
  }
  if (r.windows > 0) {
    r.mean_packet_bytes = static_cast<double>(r.aggregated_bytes) / static_cast<double>(r.windows);
    r.reduction_pct = 100.0 * (1.0 - static_cast<double>(r.aggregated_bytes) /
                                         static_cast<double>(r.raw_bytes_projected));
  }
  return r;
}

VehicleWindower::VehicleWindower(std::string vehicle_id, SamplingProfile profile, Sink sink,
                                 GapSink on_gap)
    : vehicle_id_(std::move(vehicle_id)),
      profile_(profile),
      window_ms_(profile.window_ms()),
      sink_(std::move(sink)),
      on_gap_(std::move(on_gap)) {
  profile_.validate();
}

WindowAccumulator* VehicleWindower::slot_for(TimestampMs t) {
  const auto idx = window_index(t, window_ms_);
  if (idx > newest_) {
    newest_ = idx;
    close_before(newest_ - 1);
  }
  if (idx < newest_ - 1 || idx <= closed_through_) {
    ++dropped_;
    return nullptr;
  }
  auto [it, inserted] = open_.try_emplace(idx);
  if (inserted) {
    it->second.vehicle_id = vehicle_id_;
    it->second.window_start = idx * window_ms_;
  }
  return &it->second;
}

void VehicleWindower::add(const RawSample& sample) {
  if (auto* acc = slot_for(sample.timestamp)) acc->samples.push_back(sample);
}

void VehicleWindower::add(const GpsFix& fix) {
  if (auto* acc = slot_for(fix.timestamp)) acc->fixes.push_back(fix);
}

void VehicleWindower::close_before(std::int64_t index) {
  while (!open_.empty() && open_.begin()->first < index) close(open_.begin());
}

void VehicleWindower::flush() {
  while (!open_.empty()) close(open_.begin());
}

void VehicleWindower::close(std::map<std::int64_t, WindowAccumulator>::iterator it) {
  auto& acc = it->second;
  closed_through_ = std::max(closed_through_, it->first);
  if (acc.samples.empty()) {
    ++gaps_;
    if (on_gap_) on_gap_(GapEvent{vehicle_id_, acc.window_start, acc.fixes.size()});
  } else {
    std::stable_sort(acc.samples.begin(), acc.samples.end(),
                     [](const RawSample& a, const RawSample& b) { return a.timestamp < b.timestamp; });
    std::stable_sort(acc.fixes.begin(), acc.fixes.end(),
                     [](const GpsFix& a, const GpsFix& b) { return a.timestamp < b.timestamp; });
    sink_(close_window(acc, profile_));
  }
  open_.erase(it);
}

EdgeAggregator::EdgeAggregator(SamplingProfile profile) : profile_(profile) { profile_.validate(); }

VehicleWindower& EdgeAggregator::windower(const std::string& vehicle_id) {
  auto it = vehicles_.find(vehicle_id);
  if (it == vehicles_.end()) {
    it = vehicles_
             .try_emplace(vehicle_id, vehicle_id, profile_,
                          [this](WindowSummary s) { emitted_.push_back(quantize_for_wire(s)); },
                          [this](const GapEvent& g) { gaps_.push_back(g); })
             .first;
  }
  return it->second;
}

void EdgeAggregator::add(const TelemetryRecord& record) {
  auto& w = windower(record.vehicle_id);
  std::visit([&w](const auto& payload) { w.add(payload); }, record.payload);
}

void EdgeAggregator::add_line(std::string_view line) {
  if (line.find_first_not_of(" \t\r\n") == std::string_view::npos) return;
  TelemetryRecord rec;
  try {
    rec = parse_telemetry_line(line);
  } catch (const InvalidSampleError&) {
    ++invalid_lines_;
    return;
  }
  add(rec);
}

ReplayResult EdgeAggregator::finish() {
  std::int64_t dropped = 0;
  for (auto& [_, w] : vehicles_) {
    w.flush();
    dropped += w.dropped();
  }
  ReplayResult result;
  result.summaries = std::move(emitted_);
  std::sort(result.summaries.begin(), result.summaries.end(),
            [](const WindowSummary& a, const WindowSummary& b) {
              return std::tie(a.vehicle_id, a.window_start) < std::tie(b.vehicle_id, b.window_start);
            });
  result.report = make_reduction_report(result.summaries, profile_);
  result.report.dropped_out_of_order = dropped;
  result.report.gap_windows = static_cast<std::int64_t>(gaps_.size());
  result.report.invalid_lines = invalid_lines_;
  result.gaps = std::move(gaps_);
  vehicles_.clear();
  emitted_.clear();
  gaps_.clear();
  invalid_lines_ = 0;
  return result;
}

ReplayResult run_replay(std::istream& jsonl, const SamplingProfile& profile) {
  EdgeAggregator agg(profile);
  std::string line;
  while (std::getline(jsonl, line)) agg.add_line(line);
  return agg.finish();
}

}  // namespace fleetlens
