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

#ifndef FLEETLENS_QUERY_PLANNER_HPP_
#define FLEETLENS_QUERY_PLANNER_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetlens/clustering.hpp"
#include "fleetlens/summary_store.hpp"
#include "fleetlens/telemetry.hpp"

namespace fleetlens {

// Listed in classification priority order.
enum class IntentCategory {
  kAggressiveDriving,
  kDwellTime,
  kEventCounting,
  kRouteEfficiency,
  kSpatialPatterns,
  kMicroEvent,
};

inline constexpr std::array<IntentCategory, 6> kAllCategories = {
    IntentCategory::kAggressiveDriving, IntentCategory::kDwellTime,
    IntentCategory::kEventCounting,     IntentCategory::kRouteEfficiency,
    IntentCategory::kSpatialPatterns,   IntentCategory::kMicroEvent};

std::string_view to_string(IntentCategory c);
std::optional<IntentCategory> parse_intent_category(std::string_view name);
std::vector<std::string> supported_categories();

struct Intent {
  IntentCategory category = IntentCategory::kAggressiveDriving;
  std::string query;                    // the user's text, verbatim
  std::optional<std::string> label;     // EventCounting
  std::optional<std::string> landmark;  // SpatialPatterns
  std::optional<StoreKey> event;        // MicroEvent (required)

  bool is_micro() const { return category == IntentCategory::kMicroEvent; }
};

struct GenerationSettings {
  double temperature = 0.7;
  int max_tokens = 500;
};

inline constexpr GenerationSettings kMacroSettings{0.7, 500};
inline constexpr GenerationSettings kMicroSettings{0.5, 150};

GenerationSettings settings_for(IntentCategory c);

// Keyword lexicon and retrieval radii. Loaded from JSON; missing keys keep
// their defaults.
struct PlannerConfig {
  std::map<IntentCategory, std::vector<std::string>> lexicon;
  double dwell_threshold_m = 10.0;
  double spatial_radius_m = 250.0;
  double micro_radius_m = 100.0;
  std::size_t top_k = 3;

  static PlannerConfig defaults();
  static PlannerConfig from_json(const nlohmann::json& j);
  static PlannerConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

// Lower-cased keyword matching at word starts, in category priority order.
// MicroEvent is never keyword-matched. Throws UnknownIntentError (whose
// message lists the supported categories) when nothing matches.
// With a landmark directory, SpatialPatterns picks up the landmark named in
// the query; EventCounting picks up a behavior label either way.
Intent classify(std::string_view query, const PlannerConfig& config,
                const LandmarkDirectory* landmarks = nullptr);

Intent micro_intent(const StoreKey& event, std::string query = {});

struct Hotspot {
  std::string landmark;
  std::int64_t events = 0;
  double mean_instability = 0.0;
};

struct DwellSpot {
  std::string landmark;
  double minutes = 0.0;
  std::int64_t stops = 0;
};

struct LabelCount {
  std::string label;
  std::int64_t count = 0;
};

struct HourBucket {
  int hour = 0;
  std::int64_t windows = 0;
  std::int64_t moves = 0;
  double mean_displacement_m = 0.0;
  double dwell_fraction = 0.0;
};

struct MicroContext {
  StoreKey key;
  std::string label;
  double instability = 0.0;
  double extreme_magnitude = 0.0;
  std::optional<std::string> landmark;  // unset when the window has no fix
  double landmark_distance_m = 0.0;
  double radius_m = 0.0;
  std::int64_t neighbors = 0;
  std::vector<LabelCount> neighborhood;
};

// Retrieved facts for one intent. Every number is computed from the store
// snapshot; every landmark name comes from the directory.
struct ContextSummary {
  IntentCategory category = IntentCategory::kAggressiveDriving;
  int model_version = 0;
  std::int64_t total_events = 0;
  std::optional<TimestampMs> observed_from;
  std::optional<TimestampMs> observed_to;
  std::vector<Hotspot> hotspots;
  std::vector<DwellSpot> dwell;
  double total_dwell_minutes = 0.0;
  std::int64_t total_stops = 0;
  std::vector<LabelCount> label_counts;
  std::vector<HourBucket> buckets;
  std::optional<std::string> focus_label;
  std::int64_t focus_count = 0;
  std::optional<std::string> focus_landmark;
  double focus_radius_m = 0.0;
  double focus_mean_instability = 0.0;
  double dwell_threshold_m = 0.0;
  std::optional<MicroContext> micro;

  // Names of every landmark mentioned.
  std::vector<std::string> landmarks() const;
  nlohmann::json to_json() const;
};

struct LabeledWindow {
  WindowSummary summary;
  std::string label;
};

// Labels every stored window with the model (versioned centroids applied at
// query time), sorted by (vehicle_id, window_start).
std::vector<LabeledWindow> label_snapshot(const SummaryStore& store, const BehaviorModel& model);
std::vector<LabeledWindow> label_snapshot(std::span<const WindowSummary> summaries,
                                          const BehaviorModel& model);

// Runs the category's aggregation. Throws UnknownLandmarkError for a
// SpatialPatterns intent naming no known landmark, UnknownEventError for a
// MicroEvent key that is not stored, ConfigurationError for an empty
// directory.
ContextSummary retrieve(const Intent& intent, std::span<const LabeledWindow> windows,
                        const BehaviorModel& model, const LandmarkDirectory& landmarks,
                        const PlannerConfig& config);

struct QueryPlan {
  Intent intent;
  ContextSummary context;
  std::string context_block;  // the data summary section alone
  std::string prompt_text;    // full prompt sent to the model
  double temperature = 0.7;
  int max_tokens = 500;

  nlohmann::json to_json() const;
};

// Renders the category template: header, totals, observation window and
// bullet facts, then category instructions and the question.
QueryPlan build_prompt(const Intent& intent, const ContextSummary& context);

// Marker lines delimiting the data summary inside prompt_text.
inline constexpr std::string_view kContextBegin = "### Data summary";
inline constexpr std::string_view kContextEnd = "### Instructions";

// Appended to the prompt when a response is retried after failing validation.
inline constexpr std::string_view kGroundingReminder =
    "Use only the provided facts. Repeat numbers and landmark names exactly as given.";

// "2,450" style grouping used everywhere counts are rendered.
std::string group_thousands(std::int64_t v);

}  // namespace fleetlens

#endif  // FLEETLENS_QUERY_PLANNER_HPP_
