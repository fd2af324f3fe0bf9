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

#include "fleetlens/summary_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fleetlens/codec.hpp"
#include "fleetlens/errors.hpp"
#include "fleetlens/geo.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

constexpr std::string_view kLabelsPrefix = "_labels/";
constexpr std::string_view kModelsPrefix = "_models/";

void check_vehicle_id(const std::string& vid) {
  const bool bad_start = vid.empty() || vid.front() == '.' || vid.front() == '_';
  const bool bad_char = std::any_of(vid.begin(), vid.end(), [](unsigned char c) {
    return c == '/' || c == '\\' || c < 0x20;
  });
  if (bad_start || bad_char) throw StorageError(vid, "vehicle id is not usable as a path segment");
}

std::string version_key(std::string_view prefix, int version, std::string_view ext) {
  return fmt::format("{}v{:06d}{}", prefix, version, ext);
}

// "<vid>/<date>/<ws>.json" -> window_start, without reading the object.
std::optional<StoreKey> parse_object_key(const std::string& key) {
  const auto first = key.find('/');
  const auto last = key.rfind('/');
  if (first == std::string::npos || first == last) return std::nullopt;
  constexpr std::string_view kExt = ".json";
  if (key.size() < kExt.size() || key.compare(key.size() - kExt.size(), kExt.size(), kExt) != 0) {
    return std::nullopt;
  }
  const char* begin = key.data() + last + 1;
  const char* end = key.data() + key.size() - kExt.size();
  TimestampMs ws = 0;
  auto [ptr, ec] = std::from_chars(begin, end, ws);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return StoreKey{key.substr(0, first), ws};
}

}  // namespace

void QueryFilter::validate() const {
  if (from && to && *from > *to) throw InvalidFilterError("time range has from > to");
  if (near) {
    if (!(near->radius_m > 0.0) || !std::isfinite(near->radius_m)) {
      throw InvalidFilterError("circle radius must be positive");
    }
    if (!valid_coordinates(near->lat, near->lon)) {
      throw InvalidFilterError("circle centre has invalid coordinates");
    }
  }
}

GpsQuality QueryFilter::effective_min_gps_quality() const {
  if (min_gps_quality) return *min_gps_quality;
  return near ? GpsQuality::kFix2d : GpsQuality::kNone;
}

bool QueryFilter::matches(const WindowSummary& s, const std::optional<std::string>& lbl) const {
  if (from && s.window_start < *from) return false;
  if (to && s.window_start >= *to) return false;
  if (s.gps_quality < effective_min_gps_quality()) return false;
  // A location predicate never trusts a window without a fix.
  if (near && s.gps_quality == GpsQuality::kNone) return false;
  if (near && haversine_m({near->lat, near->lon}, anchor_of(s)) > near->radius_m) return false;
  if (label && (!lbl || *lbl != *label)) return false;
  return true;
}

SummaryStore::SummaryStore(std::shared_ptr<ObjectStore> backend) : backend_(std::move(backend)) {}

SummaryStore SummaryStore::open_directory(const std::filesystem::path& root) {
  return SummaryStore(std::make_shared<FilesystemObjectStore>(root));
}

std::string SummaryStore::object_key(const StoreKey& key) {
  return fmt::format("{}/{}/{}.json", key.vehicle_id, utc_date(key.window_start),
                     key.window_start);
}

StoreKey SummaryStore::put(const WindowSummary& s) {
  check_vehicle_id(s.vehicle_id);
  const StoreKey key = key_of(s);
  backend_->put(object_key(key), encode_summary(s));
  return key;
}

std::optional<WindowSummary> SummaryStore::get(const StoreKey& key) const {
  if (key.vehicle_id.empty()) return std::nullopt;
  auto bytes = backend_->get(object_key(key));
  if (!bytes) return std::nullopt;
  return decode_summary(*bytes);
}

std::vector<StoreKey> SummaryStore::keys() const {
  std::vector<StoreKey> out;
  for (const auto& k : backend_->list("")) {
    if (k.empty() || k.front() == '_') continue;
    if (auto key = parse_object_key(k)) out.push_back(std::move(*key));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t SummaryStore::size() const { return keys().size(); }

std::vector<StoredSummary> SummaryStore::scan(const QueryFilter& filter,
                                              std::optional<int> label_version) const {
  filter.validate();
  if (!label_version) label_version = latest_label_version();
  LabelSet labels;
  if (label_version) labels = this->labels(*label_version);
  if (filter.label && labels.empty()) return {};

  std::vector<StoredSummary> out;
  for (const auto& key : keys()) {
    // The key carries window_start, so time predicates prune before any read.
    if (filter.from && key.window_start < *filter.from) continue;
    if (filter.to && key.window_start >= *filter.to) continue;
    std::optional<std::string> lbl;
    if (auto it = labels.find(key); it != labels.end()) lbl = it->second;
    if (filter.label && lbl != filter.label) continue;
    auto bytes = backend_->get(object_key(key));
    if (!bytes) continue;  // removed between list and read
    WindowSummary s = decode_summary(*bytes);
    if (!filter.matches(s, lbl)) continue;
    out.push_back({std::move(s), std::move(lbl)});
  }
  return out;
}

void SummaryStore::put_labels(int model_version, const LabelSet& labels) {
  std::ostringstream os;
  for (const auto& [key, label] : labels) {
    os << json{{"vid", key.vehicle_id}, {"ws", key.window_start}, {"label", label}}.dump() << '\n';
  }
  backend_->put(version_key(kLabelsPrefix, model_version, ".jsonl"), os.str());
}

LabelSet SummaryStore::labels(int model_version) const {
  LabelSet out;
  auto bytes = backend_->get(version_key(kLabelsPrefix, model_version, ".jsonl"));
  if (!bytes) return out;
  std::istringstream in(*bytes);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    out.emplace(StoreKey{j.at("vid").get<std::string>(), j.at("ws").get<TimestampMs>()},
                j.at("label").get<std::string>());
  }
  return out;
}

std::optional<int> SummaryStore::latest_version(const std::string& prefix) const {
  std::optional<int> best;
  for (const auto& k : backend_->list(prefix)) {
    const auto v = k.find('v', prefix.size());
    if (v == std::string::npos) continue;
    int version = 0;
    const char* begin = k.data() + v + 1;
    auto [ptr, ec] = std::from_chars(begin, k.data() + k.size(), version);
    if (ec != std::errc() || ptr == begin) continue;
    if (!best || version > *best) best = version;
  }
  return best;
}

std::optional<int> SummaryStore::latest_label_version() const {
  return latest_version(std::string(kLabelsPrefix));
}

void SummaryStore::put_model(int version, const std::string& model_json) {
  backend_->put(version_key(kModelsPrefix, version, ".json"), model_json);
}

std::optional<std::string> SummaryStore::model(int version) const {
  return backend_->get(version_key(kModelsPrefix, version, ".json"));
}

std::optional<int> SummaryStore::latest_model_version() const {
  return latest_version(std::string(kModelsPrefix));
}

}  // namespace fleetlens
