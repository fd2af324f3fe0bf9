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

#ifndef FLEETLENS_SUMMARY_STORE_HPP_
#define FLEETLENS_SUMMARY_STORE_HPP_

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fleetlens/object_store.hpp"
#include "fleetlens/telemetry.hpp"

namespace fleetlens {

struct StoreKey {
  std::string vehicle_id;
  TimestampMs window_start = 0;

  auto operator<=>(const StoreKey&) const = default;
  bool operator==(const StoreKey&) const = default;
};

inline StoreKey key_of(const WindowSummary& s) { return {s.vehicle_id, s.window_start}; }

struct GeoCircle {
  double lat = 0.0;
  double lon = 0.0;
  double radius_m = 0.0;
};

// Conjunction of optional predicates. An unset predicate matches everything.
struct QueryFilter {
  std::optional<TimestampMs> from;  // inclusive
  std::optional<TimestampMs> to;    // exclusive
  std::optional<GeoCircle> near;
  std::optional<std::string> label;
  // Unset means fix2d for queries with a location predicate and no GPS
  // requirement otherwise.
  std::optional<GpsQuality> min_gps_quality;

  // Throws InvalidFilterError (non-positive radius, bad centre, from > to).
  void validate() const;
  GpsQuality effective_min_gps_quality() const;
  // Pure predicate used by scan(); exposed for tests and in-memory callers.
  bool matches(const WindowSummary& s, const std::optional<std::string>& label) const;
};

struct StoredSummary {
  WindowSummary summary;
  std::optional<std::string> label;
};

// Behavior labels of every stored window under one model version.
using LabelSet = std::map<StoreKey, std::string>;

// Hierarchical summary store:
//   <vehicle_id>/<YYYY-MM-DD>/<window_start>.json   one encoded packet each
//   _labels/v<version>.jsonl                         {"vid","ws","label"} lines
//   _models/v<version>.json                          fitted behavior model
// Objects are plain packets and are interpreted only when read. Label sets
// are immutable per version, so older assignments stay queryable.
class SummaryStore {
 public:
  explicit SummaryStore(std::shared_ptr<ObjectStore> backend);
  static SummaryStore open_directory(const std::filesystem::path& root);

  // Last write wins on a duplicate key. Throws StorageError.
  StoreKey put(const WindowSummary& s);
  std::optional<WindowSummary> get(const StoreKey& key) const;

  // Matching summaries sorted by (vehicle_id, window_start), labelled from
  // label_version (default: the newest label set, if any).
  std::vector<StoredSummary> scan(const QueryFilter& filter,
                                  std::optional<int> label_version = std::nullopt) const;
  std::vector<StoreKey> keys() const;
  std::size_t size() const;

  void put_labels(int model_version, const LabelSet& labels);
  LabelSet labels(int model_version) const;
  std::optional<int> latest_label_version() const;

  void put_model(int version, const std::string& model_json);
  std::optional<std::string> model(int version) const;
  std::optional<int> latest_model_version() const;

  static std::string object_key(const StoreKey& key);

 private:
  std::optional<int> latest_version(const std::string& prefix) const;

  std::shared_ptr<ObjectStore> backend_;
};

}  // namespace fleetlens

#endif  // FLEETLENS_SUMMARY_STORE_HPP_
