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

#include "fleetlens/query_planner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fleetlens/errors.hpp"
#include "fleetlens/geo.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Position of needle in haystack starting at a word boundary, or npos.
std::size_t find_word_start(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return std::string_view::npos;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    if (pos == 0 || !is_word_char(haystack[pos - 1])) return pos;
  }
  return std::string_view::npos;
}

// Whole-phrase match: word boundary on both ends.
std::size_t find_phrase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return std::string_view::npos;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    const auto end = pos + needle.size();
    const bool starts = pos == 0 || !is_word_char(haystack[pos - 1]);
    const bool ends = end == haystack.size() || !is_word_char(haystack[end]);
    if (starts && ends) return pos;
  }
  return std::string_view::npos;
}

std::optional<std::string> label_in(std::string_view lowered) {
  std::vector<std::string_view> labels(kBehaviorLabels.begin(), kBehaviorLabels.end());
  std::stable_sort(labels.begin(), labels.end(),
                   [](std::string_view a, std::string_view b) { return a.size() > b.size(); });
  for (auto label : labels) {
    const auto l = lower(label);
    const auto pos = find_phrase(lowered, l);
    if (pos == std::string_view::npos) continue;
    // "aggressive" inside "very aggressive" is the longer label's match.
    if (label == kAggressive && pos >= 5 && lowered.substr(pos - 5, 5) == "very ") continue;
    return std::string(label);
  }
  if (auto pos = find_word_start(lowered, "cluster-"); pos != std::string_view::npos) {
    auto end = pos + 8;
    while (end < lowered.size() && std::isdigit(static_cast<unsigned char>(lowered[end]))) ++end;
    if (end > pos + 8) return std::string(lowered.substr(pos, end - pos));
  }
  return std::nullopt;
}

std::optional<std::string> landmark_in(std::string_view query, std::string_view lowered,
                                       const LandmarkDirectory* landmarks) {
  if (landmarks != nullptr) {
    const Landmark* best = nullptr;
    for (const auto& lm : landmarks->entries()) {
      if (find_phrase(lowered, lower(lm.name)) == std::string_view::npos) continue;
      if (best == nullptr || lm.name.size() > best->name.size()) best = &lm;
    }
    if (best != nullptr) return best->name;
  }
  // Fall back to whatever follows the spatial keyword, so that an unknown
  // place surfaces as an unknown-landmark error instead of a silent default.
  for (std::string_view kw : {"around ", "near ", "patterns at ", " at "}) {
    auto pos = lowered.find(kw);
    if (pos == std::string_view::npos) continue;
    std::string rest(query.substr(pos + kw.size()));
    while (!rest.empty() && std::string_view("?.!, ").find(rest.back()) != std::string_view::npos) {
      rest.pop_back();
    }
    if (lower(rest).rfind("the ", 0) == 0) rest.erase(0, 4);
    if (!rest.empty()) return rest;
  }
  return std::nullopt;
}

IntentCategory category_from_json_key(const std::string& key) {
  auto c = parse_intent_category(key);
  if (!c) throw ConfigurationError("unknown intent category in lexicon: " + key);
  return *c;
}

}  // namespace

std::string_view to_string(IntentCategory c) {
  switch (c) {
    case IntentCategory::kAggressiveDriving: return "AggressiveDriving";
    case IntentCategory::kDwellTime: return "DwellTime";
    case IntentCategory::kEventCounting: return "EventCounting";
    case IntentCategory::kRouteEfficiency: return "RouteEfficiency";
    case IntentCategory::kSpatialPatterns: return "SpatialPatterns";
    case IntentCategory::kMicroEvent: return "MicroEvent";
  }
  return "AggressiveDriving";
}

std::optional<IntentCategory> parse_intent_category(std::string_view name) {
  for (auto c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::vector<std::string> supported_categories() {
  std::vector<std::string> out;
  for (auto c : kAllCategories) out.emplace_back(to_string(c));
  return out;
}

GenerationSettings settings_for(IntentCategory c) {
  return c == IntentCategory::kMicroEvent ? kMicroSettings : kMacroSettings;
}

PlannerConfig PlannerConfig::defaults() {
  PlannerConfig c;
  c.lexicon = {
      {IntentCategory::kAggressiveDriving, {"aggressive", "dangerous", "harsh", "unsafe"}},
      {IntentCategory::kDwellTime, {"dwell", "idle", "wait", "stopped"}},
      {IntentCategory::kEventCounting, {"how many", "count", "instances"}},
      {IntentCategory::kRouteEfficiency, {"efficien", "route", "compare", "morning", "evening"}},
      {IntentCategory::kSpatialPatterns, {"around", "near", "patterns at"}},
  };
  return c;
}

PlannerConfig PlannerConfig::from_json(const json& j) {
  PlannerConfig c = defaults();
  try {
    if (j.contains("lexicon")) {
      for (const auto& [key, words] : j.at("lexicon").items()) {
        const auto cat = category_from_json_key(key);
        if (cat == IntentCategory::kMicroEvent) {
          throw ConfigurationError("MicroEvent is selected explicitly, not by keywords");
        }
        std::vector<std::string> lowered;
        for (const auto& w : words.get<std::vector<std::string>>()) lowered.push_back(lower(w));
        c.lexicon[cat] = std::move(lowered);
      }
    }
    c.dwell_threshold_m = j.value("dwell_threshold_m", c.dwell_threshold_m);
    c.spatial_radius_m = j.value("spatial_radius_m", c.spatial_radius_m);
    c.micro_radius_m = j.value("micro_radius_m", c.micro_radius_m);
    c.top_k = j.value("top_k", c.top_k);
  } catch (const json::exception& e) {
    throw ConfigurationError(fmt::format("malformed planner config: {}", e.what()));
  }
  if (!(c.dwell_threshold_m > 0.0) || !(c.spatial_radius_m > 0.0) || !(c.micro_radius_m > 0.0) ||
      c.top_k == 0) {
    throw ConfigurationError("planner radii and top_k must be positive");
  }
  return c;
}

PlannerConfig PlannerConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open planner config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigurationError(fmt::format("planner config is not valid JSON: {}", e.what()));
  }
  return from_json(j);
}

json PlannerConfig::to_json() const {
  json lex = json::object();
  for (const auto& [cat, words] : lexicon) lex[std::string(to_string(cat))] = words;
  return {{"lexicon", lex},
          {"dwell_threshold_m", dwell_threshold_m},
          {"spatial_radius_m", spatial_radius_m},
          {"micro_radius_m", micro_radius_m},
          {"top_k", top_k}};
}

Intent classify(std::string_view query, const PlannerConfig& config,
                const LandmarkDirectory* landmarks) {
  const std::string lowered = lower(query);
  if (lowered.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw UnknownIntentError("empty query; supported categories: " +
                             fmt::format("{}", fmt::join(supported_categories(), ", ")));
  }
  for (auto cat : kAllCategories) {
    auto it = config.lexicon.find(cat);
    if (it == config.lexicon.end()) continue;
    const bool hit = std::any_of(it->second.begin(), it->second.end(), [&](const std::string& kw) {
      return find_word_start(lowered, kw) != std::string::npos;
    });
    if (!hit) continue;
    Intent intent;
    intent.category = cat;
    intent.query = std::string(query);
    if (cat == IntentCategory::kEventCounting) intent.label = label_in(lowered);
    if (cat == IntentCategory::kSpatialPatterns) intent.landmark = landmark_in(query, lowered, landmarks);
    return intent;
  }
  throw UnknownIntentError(fmt::format("could not classify query \"{}\"; supported categories: {}",
                                       query, fmt::join(supported_categories(), ", ")));
}

Intent micro_intent(const StoreKey& event, std::string query) {
  Intent i;
  i.category = IntentCategory::kMicroEvent;
  i.event = event;
  i.query = query.empty() ? "Explain this driving event." : std::move(query);
  return i;
}

std::vector<std::string> ContextSummary::landmarks() const {
  std::vector<std::string> out;
  for (const auto& h : hotspots) out.push_back(h.landmark);
  for (const auto& d : dwell) out.push_back(d.landmark);
  if (focus_landmark) out.push_back(*focus_landmark);
  if (micro && micro->landmark) out.push_back(*micro->landmark);
  return out;
}

std::vector<LabeledWindow> label_snapshot(std::span<const WindowSummary> summaries,
                                          const BehaviorModel& model) {
  std::vector<LabeledWindow> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) out.push_back({s, model.assign(s)});
  std::sort(out.begin(), out.end(), [](const LabeledWindow& a, const LabeledWindow& b) {
    return key_of(a.summary) < key_of(b.summary);
  });
  return out;
}

std::vector<LabeledWindow> label_snapshot(const SummaryStore& store, const BehaviorModel& model) {
  std::vector<WindowSummary> summaries;
  for (auto& s : store.scan(QueryFilter{})) summaries.push_back(std::move(s.summary));
  return label_snapshot(summaries, model);
}

namespace {

bool located(const WindowSummary& s) { return s.gps_quality >= GpsQuality::kFix2d; }

std::vector<LabelCount> count_labels(std::span<const LabeledWindow* const> windows,
                                     const BehaviorModel& model) {
  // Model label order, which for k = 5 runs Calm -> Very Aggressive.
  std::vector<std::size_t> order(model.label_map.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto fa = model.centroid_features(a);
    const auto fb = model.centroid_features(b);
    if (fa.instability != fb.instability) return fa.instability < fb.instability;
    return fa.extreme_event_magnitude < fb.extreme_event_magnitude;
  });
  std::vector<LabelCount> counts;
  for (auto idx : order) counts.push_back({model.label_map[idx], 0});
  for (const auto* w : windows) {
    for (auto& c : counts) {
      if (c.label == w->label) {
        ++c.count;
        break;
      }
    }
  }
  return counts;
}

template <typename T, typename Less>
void keep_top(std::vector<T>& v, std::size_t k, Less less) {
  std::sort(v.begin(), v.end(), less);
  if (v.size() > k) v.resize(k);
}

// Consecutive windows of one vehicle, i.e. b starts exactly where a ends.
bool adjacent(const WindowSummary& a, const WindowSummary& b) {
  return a.vehicle_id == b.vehicle_id &&
         b.window_start - a.window_start ==
             static_cast<TimestampMs>(std::llround(a.window_duration_s * 1000.0));
}

void retrieve_aggressive(ContextSummary& ctx, std::span<const LabeledWindow> windows,
                         const LandmarkDirectory& landmarks, const PlannerConfig& config) {
  std::map<std::string, Hotspot> groups;
  for (const auto& w : windows) {
    if (!is_aggressive_label(w.label)) continue;
    ++ctx.focus_count;
    if (!located(w.summary)) continue;
    const auto near = nearest_landmark(anchor_of(w.summary), landmarks);
    auto& h = groups[near.name];
    h.landmark = near.name;
    ++h.events;
    h.mean_instability += w.summary.mag_variance;
  }
  for (auto& [_, h] : groups) {
    h.mean_instability /= static_cast<double>(h.events);
    ctx.hotspots.push_back(h);
  }
  keep_top(ctx.hotspots, config.top_k, [](const Hotspot& a, const Hotspot& b) {
    if (a.events != b.events) return a.events > b.events;
    return a.landmark < b.landmark;
  });
}

void retrieve_dwell(ContextSummary& ctx, std::span<const LabeledWindow> windows,
                    const LandmarkDirectory& landmarks, const PlannerConfig& config) {
  std::map<std::string, DwellSpot> spots;
  std::size_t i = 0;
  while (i < windows.size()) {
    // Grow a maximal run of stationary moves starting at window i.
    std::size_t j = i;
    while (j + 1 < windows.size()) {
      const auto& a = windows[j].summary;
      const auto& b = windows[j + 1].summary;
      if (!adjacent(a, b) || !located(a) || !located(b) ||
          haversine_m(anchor_of(a), anchor_of(b)) >= config.dwell_threshold_m) {
        break;
      }
      ++j;
    }
    if (j > i) {
      const auto& first = windows[i].summary;
      const auto near = nearest_landmark(anchor_of(first), landmarks);
      auto& spot = spots[near.name];
      spot.landmark = near.name;
      double seconds = 0.0;
      for (std::size_t r = i; r <= j; ++r) seconds += windows[r].summary.window_duration_s;
      spot.minutes += seconds / 60.0;
      ++spot.stops;
      ctx.total_dwell_minutes += seconds / 60.0;
      ++ctx.total_stops;
    }
    i = j + 1;
  }
  for (auto& [_, s] : spots) ctx.dwell.push_back(s);
  keep_top(ctx.dwell, config.top_k, [](const DwellSpot& a, const DwellSpot& b) {
    if (a.minutes != b.minutes) return a.minutes > b.minutes;
    return a.landmark < b.landmark;
  });
}

void retrieve_route(ContextSummary& ctx, std::span<const LabeledWindow> windows,
                    const PlannerConfig& config) {
  std::map<int, HourBucket> buckets;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& s = windows[i].summary;
    auto& b = buckets[utc_hour_of_day(s.window_start)];
    b.hour = utc_hour_of_day(s.window_start);
    ++b.windows;
    if (i == 0) continue;
    const auto& prev = windows[i - 1].summary;
    if (!adjacent(prev, s) || !located(prev) || !located(s)) continue;
    const double d = haversine_m(anchor_of(prev), anchor_of(s));
    ++b.moves;
    b.mean_displacement_m += d;
    if (d < config.dwell_threshold_m) b.dwell_fraction += 1.0;
  }
  for (auto& [_, b] : buckets) {
    if (b.moves > 0) {
      b.mean_displacement_m /= static_cast<double>(b.moves);
      b.dwell_fraction /= static_cast<double>(b.moves);
    }
    ctx.buckets.push_back(b);
  }
}

void retrieve_spatial(ContextSummary& ctx, const Intent& intent,
                      std::span<const LabeledWindow> windows, const BehaviorModel& model,
                      const LandmarkDirectory& landmarks, const PlannerConfig& config) {
  const Landmark* lm = intent.landmark ? landmarks.find(*intent.landmark) : nullptr;
  if (lm == nullptr) throw UnknownLandmarkError(intent.landmark.value_or(""));
  ctx.focus_landmark = lm->name;
  ctx.focus_radius_m = config.spatial_radius_m;
  std::vector<const LabeledWindow*> inside;
  double instability = 0.0;
  for (const auto& w : windows) {
    if (!located(w.summary)) continue;
    if (haversine_m({lm->lat, lm->lon}, anchor_of(w.summary)) > config.spatial_radius_m) continue;
    inside.push_back(&w);
    instability += w.summary.mag_variance;
  }
  ctx.focus_count = static_cast<std::int64_t>(inside.size());
  if (!inside.empty()) ctx.focus_mean_instability = instability / static_cast<double>(inside.size());
  ctx.label_counts = count_labels(inside, model);
}

void retrieve_micro(ContextSummary& ctx, const Intent& intent,
                    std::span<const LabeledWindow> windows, const BehaviorModel& model,
                    const LandmarkDirectory& landmarks, const PlannerConfig& config) {
  if (!intent.event) throw UnknownEventError("micro-event intent without an event key");
  const auto it = std::find_if(windows.begin(), windows.end(), [&](const LabeledWindow& w) {
    return key_of(w.summary) == *intent.event;
  });
  if (it == windows.end()) {
    throw UnknownEventError(fmt::format("no stored window {}@{}", intent.event->vehicle_id,
                                        intent.event->window_start));
  }
  MicroContext m;
  m.key = *intent.event;
  m.label = it->label;
  const auto f = extract_features(it->summary);
  m.instability = f.instability;
  m.extreme_magnitude = f.extreme_event_magnitude;
  m.radius_m = config.micro_radius_m;
  std::vector<const LabeledWindow*> near;
  if (located(it->summary)) {
    const auto lm = nearest_landmark(anchor_of(it->summary), landmarks);
    m.landmark = lm.name;
    m.landmark_distance_m = lm.distance_m;
    for (const auto& w : windows) {
      if (&w == &*it || !located(w.summary)) continue;
      if (haversine_m(anchor_of(it->summary), anchor_of(w.summary)) <= config.micro_radius_m) {
        near.push_back(&w);
      }
    }
  }
  m.neighbors = static_cast<std::int64_t>(near.size());
  m.neighborhood = count_labels(near, model);
  ctx.micro = std::move(m);
}

}  // namespace

ContextSummary retrieve(const Intent& intent, std::span<const LabeledWindow> windows,
                        const BehaviorModel& model, const LandmarkDirectory& landmarks,
                        const PlannerConfig& config) {
  if (landmarks.empty()) throw ConfigurationError("landmark directory is empty");
  const auto by_key = [](const LabeledWindow& a, const LabeledWindow& b) {
    return key_of(a.summary) < key_of(b.summary);
  };
  if (!std::is_sorted(windows.begin(), windows.end(), by_key)) {
    std::vector<LabeledWindow> sorted(windows.begin(), windows.end());
    std::sort(sorted.begin(), sorted.end(), by_key);
    return retrieve(intent, sorted, model, landmarks, config);
  }
  ContextSummary ctx;
  ctx.category = intent.category;
  ctx.model_version = model.version;
  ctx.total_events = static_cast<std::int64_t>(windows.size());
  ctx.dwell_threshold_m = config.dwell_threshold_m;
  for (const auto& w : windows) {
    const auto end =
        w.summary.window_start + static_cast<TimestampMs>(std::llround(w.summary.window_duration_s * 1000.0));
    if (!ctx.observed_from || w.summary.window_start < *ctx.observed_from) {
      ctx.observed_from = w.summary.window_start;
    }
    if (!ctx.observed_to || end > *ctx.observed_to) ctx.observed_to = end;
  }

  switch (intent.category) {
    case IntentCategory::kAggressiveDriving:
      retrieve_aggressive(ctx, windows, landmarks, config);
      break;
    case IntentCategory::kDwellTime:
      retrieve_dwell(ctx, windows, landmarks, config);
      break;
    case IntentCategory::kEventCounting: {
      std::vector<const LabeledWindow*> all;
      for (const auto& w : windows) all.push_back(&w);
      ctx.label_counts = count_labels(all, model);
      if (intent.label) {
        ctx.focus_label = intent.label;
        ctx.focus_count = std::count_if(windows.begin(), windows.end(),
                                        [&](const LabeledWindow& w) { return w.label == *intent.label; });
      }
      break;
    }
    case IntentCategory::kRouteEfficiency:
      retrieve_route(ctx, windows, config);
      break;
    case IntentCategory::kSpatialPatterns:
      retrieve_spatial(ctx, intent, windows, model, landmarks, config);
      break;
    case IntentCategory::kMicroEvent:
      retrieve_micro(ctx, intent, windows, model, landmarks, config);
      break;
  }
  return ctx;
}

}  // namespace fleetlens
