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

#ifndef FLEETLENS_EDGE_AGGREGATOR_HPP_
#define FLEETLENS_EDGE_AGGREGATOR_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fleetlens/telemetry.hpp"

namespace fleetlens {

// Nearest-rank percentile: the value at 1-based index ceil(p/100 * n) of the
// sorted values. p must lie in (0, 100). Throws EmptyWindowError when values
// is empty.
double percentile(std::span<const double> values, double p);
// Same, for input that is already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double p);

struct WindowAccumulator {
  std::string vehicle_id;
  TimestampMs window_start = 0;
  std::vector<RawSample> samples;
  std::vector<GpsFix> fixes;
};

// Computes the summary of one window: population mean/variance of the sample
// magnitudes, nearest-rank p1/p10/p90/p99 per axis, and the GPS anchor (the
// last fix of the best quality seen in the window). Values are full
// precision; quantize_for_wire() gives the transmitted form.
// Throws EmptyWindowError when the window has no accelerometer samples.
WindowSummary close_window(const WindowAccumulator& acc, const SamplingProfile& profile);

// Index of the tumbling window containing t: floor(t / window_ms).
std::int64_t window_index(TimestampMs t, std::int64_t window_ms);

struct ReductionReport {
  std::int64_t windows = 0;
  std::int64_t raw_bytes_projected = 0;
  std::int64_t aggregated_bytes = 0;
  double reduction_pct = 0.0;
  std::int64_t max_packet_bytes = 0;
  double mean_packet_bytes = 0.0;
  std::int64_t dropped_out_of_order = 0;
  std::int64_t gap_windows = 0;
  std::int64_t invalid_lines = 0;
};

// Encoded packet bytes against raw_payload_bytes(profile) per window.
ReductionReport make_reduction_report(std::span<const WindowSummary> summaries,
                                      const SamplingProfile& profile);

struct GapEvent {
  std::string vehicle_id;
  TimestampMs window_start = 0;
  std::size_t gps_fixes = 0;
};

// Tumbling-window state for one vehicle. Keeps at most two windows open (the
// newest and the one before it); anything older than that arrives too late
// and is dropped. Not thread-safe; drive one instance per stream.
class VehicleWindower {
 public:
  using Sink = std::function<void(WindowSummary)>;
  using GapSink = std::function<void(const GapEvent&)>;

  VehicleWindower(std::string vehicle_id, SamplingProfile profile, Sink sink, GapSink on_gap = {});

  void add(const RawSample& sample);
  void add(const GpsFix& fix);
  // Closes every open window.
  void flush();

  std::int64_t dropped() const noexcept { return dropped_; }
  std::int64_t gaps() const noexcept { return gaps_; }

 private:
  WindowAccumulator* slot_for(TimestampMs t);
  void close_before(std::int64_t index);
  void close(std::map<std::int64_t, WindowAccumulator>::iterator it);

  std::string vehicle_id_;
  SamplingProfile profile_;
  std::int64_t window_ms_;
  Sink sink_;
  GapSink on_gap_;
  std::map<std::int64_t, WindowAccumulator> open_;
  std::int64_t newest_ = INT64_MIN;
  std::int64_t closed_through_ = INT64_MIN;
  std::int64_t dropped_ = 0;
  std::int64_t gaps_ = 0;
};

struct ReplayResult {
  // Quantized packets, sorted by (vehicle_id, window_start).
  std::vector<WindowSummary> summaries;
  ReductionReport report;
  std::vector<GapEvent> gaps;
};

// Simulates the edge tier over a recorded telemetry stream. One windower per
// vehicle; malformed lines are counted and skipped.
class EdgeAggregator {
 public:
  explicit EdgeAggregator(SamplingProfile profile);
  // The windowers' sinks point back at this object.
  EdgeAggregator(const EdgeAggregator&) = delete;
  EdgeAggregator& operator=(const EdgeAggregator&) = delete;

  void add(const TelemetryRecord& record);
  void add_line(std::string_view line);
  ReplayResult finish();

 private:
  VehicleWindower& windower(const std::string& vehicle_id);

  SamplingProfile profile_;
  std::map<std::string, VehicleWindower> vehicles_;
  std::vector<WindowSummary> emitted_;
  std::vector<GapEvent> gaps_;
  std::int64_t invalid_lines_ = 0;
};

ReplayResult run_replay(std::istream& jsonl, const SamplingProfile& profile);

}  // namespace fleetlens

#endif  // FLEETLENS_EDGE_AGGREGATOR_HPP_
