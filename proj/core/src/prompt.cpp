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

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "fleetlens/query_planner.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

constexpr std::string_view kPreamble =
    "You are a fleet telematics analyst. Answer the question using only the facts in the data "
    "summary. Refer to places only by the landmark names it lists.";

constexpr std::string_view kNoData =
    "The data summary contains no matching data. State plainly that no data is available for "
    "this question and do not speculate or estimate.";

std::string fixed(double v, int decimals) {
  if (std::fabs(v) < 0.5 * std::pow(10.0, -decimals)) v = 0.0;
  return fmt::format("{:.{}f}", v, decimals);
}

std::string meters(double v) { return fmt::format("{}", static_cast<long long>(std::llround(v))); }

std::string observation_window(const ContextSummary& c) {
  if (!c.observed_from || !c.observed_to) return "no data";
  if (utc_date(*c.observed_from) == utc_date(*c.observed_to - 1)) {
    return fmt::format("{}-{} UTC", utc_minute(*c.observed_from), utc_hour_minute(*c.observed_to));
  }
  return fmt::format("{} to {} UTC", utc_minute(*c.observed_from), utc_minute(*c.observed_to));
}

std::string_view header(IntentCategory c) {
  switch (c) {
    case IntentCategory::kAggressiveDriving: return "Aggressive driving summary";
    case IntentCategory::kDwellTime: return "Dwell time summary";
    case IntentCategory::kEventCounting: return "Event count summary";
    case IntentCategory::kRouteEfficiency: return "Route efficiency summary";
    case IntentCategory::kSpatialPatterns: return "Spatial pattern summary";
    case IntentCategory::kMicroEvent: return "Selected event summary";
  }
  return "";
}

std::string_view instructions(IntentCategory c) {
  switch (c) {
    case IntentCategory::kAggressiveDriving:
      return "Explain where aggressive driving concentrates and what the instability values "
             "suggest about those places. Quote landmark names, event counts and instability "
             "values exactly as listed.";
    case IntentCategory::kDwellTime:
      return "Identify the landmarks where vehicles dwell longest and offer plausible operational "
             "causes. Quote dwell minutes and stop counts exactly as listed.";
    case IntentCategory::kEventCounting:
      return "Answer with the requested count, then put it in context with the other labels. "
             "Quote every count exactly as listed.";
    case IntentCategory::kRouteEfficiency:
      return "Compare the hourly buckets: movement per window and dwell share indicate how "
             "efficiently the route runs. Quote values exactly as listed.";
    case IntentCategory::kSpatialPatterns:
      return "Describe the driving patterns around the landmark using the label mix and mean "
             "instability. Quote values exactly as listed.";
    case IntentCategory::kMicroEvent:
      return "Explain briefly what most likely caused this event, using its behavior label, the "
             "nearest landmark and the neighbouring windows. Keep the tone consistent with the "
             "label. Quote values exactly as listed.";
  }
  return "";
}

void label_lines(std::ostringstream& os, const std::vector<LabelCount>& counts) {
  for (const auto& c : counts) os << "- " << c.label << ": " << group_thousands(c.count) << '\n';
}

std::string render_context(const Intent& intent, const ContextSummary& c) {
  std::ostringstream os;
  os << header(c.category) << " (behavior model v" << c.model_version << ")\n";
  switch (c.category) {
    case IntentCategory::kAggressiveDriving:
      os << "Scope: windows labelled Aggressive or Very Aggressive, grouped by nearest landmark.\n"
         << "Instability: variance of acceleration magnitude within a window.\n";
      break;
    case IntentCategory::kDwellTime:
      os << "Scope: a stop is a run of consecutive windows whose GPS anchor moved less than "
         << fmt::format("{}", c.dwell_threshold_m) << " m, attributed to the nearest landmark.\n";
      break;
    case IntentCategory::kEventCounting:
      os << "Scope: windows per behavior label, from Calm to Very Aggressive.\n";
      break;
    case IntentCategory::kRouteEfficiency:
      os << "Scope: movement between consecutive windows of each vehicle, grouped by hour of day "
            "(UTC). Dwell share is the fraction of moves under "
         << fmt::format("{}", c.dwell_threshold_m) << " m.\n";
      break;
    case IntentCategory::kSpatialPatterns:
      os << "Scope: windows with a GPS anchor within " << fmt::format("{}", c.focus_radius_m)
         << " m of " << c.focus_landmark.value_or("the landmark") << ".\n"
         << "Instability: variance of acceleration magnitude within a window.\n";
      break;
    case IntentCategory::kMicroEvent:
      os << "Scope: one selected window and the windows around it.\n"
         << "Instability: variance of acceleration magnitude within the window.\n";
      break;
  }
  os << "Total events: " << group_thousands(c.total_events) << '\n';
  os << "Observation window: " << observation_window(c) << '\n';

  switch (c.category) {
    case IntentCategory::kAggressiveDriving:
      os << "Aggressive windows: " << group_thousands(c.focus_count) << '\n';
      if (c.hotspots.empty()) {
        os << "Hotspots: none\n";
      } else {
        os << "Hotspots:\n";
        for (const auto& h : c.hotspots) {
          os << "- " << h.landmark << ": " << group_thousands(h.events) << " events, instability "
             << fixed(h.mean_instability, 2) << '\n';
        }
      }
      break;
    case IntentCategory::kDwellTime:
      os << "Total dwell: " << fixed(c.total_dwell_minutes, 1) << " minutes across "
         << group_thousands(c.total_stops) << " stops\n";
      if (c.dwell.empty()) {
        os << "Dwell hotspots: none\n";
      } else {
        os << "Dwell hotspots:\n";
        for (const auto& d : c.dwell) {
          os << "- " << d.landmark << ": " << fixed(d.minutes, 1) << " minutes over "
             << group_thousands(d.stops) << " stops\n";
        }
      }
      break;
    case IntentCategory::kEventCounting:
      if (c.focus_label) {
        os << "Requested label: " << *c.focus_label << '\n'
           << *c.focus_label << " windows: " << group_thousands(c.focus_count) << '\n';
      }
      os << "Counts by label:\n";
      label_lines(os, c.label_counts);
      break;
    case IntentCategory::kRouteEfficiency: {
      if (c.buckets.empty()) {
        os << "Hourly buckets: none\n";
        break;
      }
      os << "Hourly buckets:\n";
      // Keep the block bounded: at most 12 buckets, the busiest ones.
      auto buckets = c.buckets;
      if (buckets.size() > 12) {
        std::stable_sort(buckets.begin(), buckets.end(),
                         [](const HourBucket& a, const HourBucket& b) { return a.windows > b.windows; });
        buckets.resize(12);
        std::sort(buckets.begin(), buckets.end(),
                  [](const HourBucket& a, const HourBucket& b) { return a.hour < b.hour; });
      }
      for (const auto& b : buckets) {
        os << "- " << fmt::format("{:02d}:00", b.hour) << " UTC: " << group_thousands(b.windows)
           << " windows, " << fixed(b.mean_displacement_m, 1) << " m per window, dwell share "
           << fixed(b.dwell_fraction, 2) << '\n';
      }
      break;
    }
    case IntentCategory::kSpatialPatterns:
      os << "Windows near " << c.focus_landmark.value_or("the landmark") << ": "
         << group_thousands(c.focus_count) << '\n';
      os << "Mean instability nearby: " << fixed(c.focus_mean_instability, 2) << '\n';
      os << "Counts by label:\n";
      label_lines(os, c.label_counts);
      break;
    case IntentCategory::kMicroEvent: {
      const auto& m = *c.micro;
      os << "Vehicle: " << m.key.vehicle_id << '\n'
         << "Window start: " << utc_minute(m.key.window_start) << " UTC\n"
         << "Behavior label: " << m.label << '\n'
         << "Instability: " << fixed(m.instability, 2) << '\n'
         << "Extreme event magnitude: " << fixed(m.extreme_magnitude, 2) << '\n';
      if (m.landmark) {
        os << "Nearest landmark: " << *m.landmark << " (" << meters(m.landmark_distance_m)
           << " m away)\n";
      } else {
        os << "Nearest landmark: unknown (no GPS fix)\n";
      }
      os << "Neighbouring windows within " << fmt::format("{}", m.radius_m)
         << " m: " << group_thousands(m.neighbors) << '\n';
      if (m.neighbors > 0) {
        os << "Neighbour labels:\n";
        label_lines(os, m.neighborhood);
      }
      break;
    }
  }
  (void)intent;
  return os.str();
}

bool has_data(const ContextSummary& c) {
  if (c.total_events == 0) return false;
  if (c.category == IntentCategory::kSpatialPatterns) return c.focus_count > 0;
  return true;
}

}  // namespace

std::string group_thousands(std::int64_t v) {
  const bool neg = v < 0;
  std::string digits = std::to_string(neg ? -v : v);
  std::string out;
  const auto n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[i]);
    if ((n - i - 1) % 3 == 0 && i + 1 < n) out.push_back(',');
  }
  return neg ? "-" + out : out;
}

QueryPlan build_prompt(const Intent& intent, const ContextSummary& context) {
  QueryPlan plan;
  plan.intent = intent;
  plan.context = context;
  plan.context_block = render_context(intent, context);
  const auto settings = settings_for(intent.category);
  plan.temperature = settings.temperature;
  plan.max_tokens = settings.max_tokens;

  std::ostringstream os;
  os << kPreamble << "\n\n"
     << kContextBegin << '\n'
     << plan.context_block << '\n'
     << kContextEnd << '\n'
     << (has_data(context) ? instructions(intent.category) : kNoData) << '\n'
     << "Answer in at most " << (intent.is_micro() ? "three" : "six") << " sentences.\n\n"
     << "### Question\n"
     << intent.query << '\n';
  plan.prompt_text = os.str();
  return plan;
}

json ContextSummary::to_json() const {
  json j{{"category", to_string(category)},
         {"model_version", model_version},
         {"total_events", total_events}};
  if (observed_from) j["observed_from"] = *observed_from;
  if (observed_to) j["observed_to"] = *observed_to;
  if (!hotspots.empty()) {
    json arr = json::array();
    for (const auto& h : hotspots) {
      arr.push_back({{"landmark", h.landmark}, {"events", h.events},
                     {"mean_instability", h.mean_instability}});
    }
    j["hotspots"] = arr;
  }
  if (category == IntentCategory::kDwellTime) {
    json arr = json::array();
    for (const auto& d : dwell) {
      arr.push_back({{"landmark", d.landmark}, {"minutes", d.minutes}, {"stops", d.stops}});
    }
    j["dwell"] = arr;
    j["total_dwell_minutes"] = total_dwell_minutes;
    j["total_stops"] = total_stops;
  }
  if (!label_counts.empty()) {
    json obj = json::object();
    for (const auto& c : label_counts) obj[c.label] = c.count;
    j["label_counts"] = obj;
  }
  if (!buckets.empty()) {
    json arr = json::array();
    for (const auto& b : buckets) {
      arr.push_back({{"hour", b.hour}, {"windows", b.windows}, {"moves", b.moves},
                     {"mean_displacement_m", b.mean_displacement_m},
                     {"dwell_fraction", b.dwell_fraction}});
    }
    j["buckets"] = arr;
  }
  if (focus_label) j["focus_label"] = *focus_label;
  if (focus_landmark) {
    j["focus_landmark"] = *focus_landmark;
    j["focus_radius_m"] = focus_radius_m;
    j["focus_mean_instability"] = focus_mean_instability;
  }
  if (focus_label || focus_landmark || category == IntentCategory::kAggressiveDriving) {
    j["focus_count"] = focus_count;
  }
  if (micro) {
    json nb = json::object();
    for (const auto& c : micro->neighborhood) nb[c.label] = c.count;
    j["micro"] = {{"vehicle_id", micro->key.vehicle_id},
                  {"window_start", micro->key.window_start},
                  {"label", micro->label},
                  {"instability", micro->instability},
                  {"extreme_event_magnitude", micro->extreme_magnitude},
                  {"landmark", micro->landmark ? json(*micro->landmark) : json(nullptr)},
                  {"landmark_distance_m", micro->landmark_distance_m},
                  {"radius_m", micro->radius_m},
                  {"neighbors", micro->neighbors},
                  {"neighborhood", nb}};
  }
  return j;
}

json QueryPlan::to_json() const {
  json intent_json{{"category", to_string(intent.category)}, {"query", intent.query}};
  if (intent.label) intent_json["label"] = *intent.label;
  if (intent.landmark) intent_json["landmark"] = *intent.landmark;
  if (intent.event) {
    intent_json["event"] = {{"vehicle_id", intent.event->vehicle_id},
                            {"window_start", intent.event->window_start}};
  }
  return {{"intent", intent_json},
          {"context", context.to_json()},
          {"prompt", prompt_text},
          {"temperature", temperature},
          {"max_tokens", max_tokens}};
}

}  // namespace fleetlens
