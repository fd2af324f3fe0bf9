// Copyright 2026 The FleetLens Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <random>
#include <regex>
#include <set>

#include <gtest/gtest.h>

#include "fleetlens/clustering.hpp"
#include "fleetlens/errors.hpp"
#include "fleetlens/geo.hpp"
#include "fleetlens/llm_gateway.hpp"
#include "fleetlens/query_planner.hpp"
#include "fleetlens/synthetic.hpp"

namespace fleetlens {
namespace {

constexpr TimestampMs kT0 = 1729519200000;

WindowSummary window(std::string vehicle, int index, double lat, double lon, double variance = 0.1,
                     GpsQuality gps = GpsQuality::kFix3d) {
  WindowSummary s;
  s.vehicle_id = std::move(vehicle);
  s.window_start = kT0 + index * 60'000;
  s.window_duration_s = 60;
  s.mag_mean = 9.8;
  s.mag_variance = variance;
  s.x = {0.1, 0.2, 0.3};
  s.y = {0.1, 0.2, 0.3};
  s.z = {9.7, 9.8, 9.9};
  s.anchor_lat = lat;
  s.anchor_lon = lon;
  s.gps_quality = gps;
  s.sample_count = 3000;
  return s;
}

// Shared fixture: the shaped dataset and a model fitted on it.
struct Shaped {
  ShapedDataset data = generate_shaped_dataset(shaped_modes(), campus_landmarks());
  BehaviorModel model;
  std::vector<LabeledWindow> windows;

  Shaped() {
    std::vector<FeatureVector> f;
    for (const auto& s : data.summaries) f.push_back(extract_features(s));
    model = fit(f, 5);
    windows = label_snapshot(data.summaries, model);
  }
};

const Shaped& shaped() {
  static const Shaped s;
  return s;
}

TEST(Classify, KeywordExamples) {
  const auto cfg = PlannerConfig::defaults();
  EXPECT_EQ(classify("Where is driving most dangerous?", cfg).category,
            IntentCategory::kAggressiveDriving);
  EXPECT_EQ(classify("Which zones show the longest dwell times?", cfg).category,
            IntentCategory::kDwellTime);
  EXPECT_EQ(classify("How many instances of moderate driving?", cfg).category,
            IntentCategory::kEventCounting);
  EXPECT_EQ(classify("Compare morning and evening efficiency", cfg).category,
            IntentCategory::kRouteEfficiency);
  EXPECT_EQ(classify("What happens around the stadium?", cfg).category,
            IntentCategory::kSpatialPatterns);
  // Priority order: AggressiveDriving wins over DwellTime.
  EXPECT_EQ(classify("Harsh braking while idle", cfg).category, IntentCategory::kAggressiveDriving);
  // Keywords match at word starts only.
  EXPECT_THROW(classify("We await results", cfg), UnknownIntentError);
}

TEST(Classify, UnknownIntentListsCategories) {
  const auto cfg = PlannerConfig::defaults();
  try {
    classify("hello there", cfg);
    FAIL() << "expected UnknownIntentError";
  } catch (const UnknownIntentError& e) {
    for (const auto& c : supported_categories()) EXPECT_NE(std::string(e.what()).find(c), std::string::npos);
  }
  EXPECT_THROW(classify("   ", cfg), UnknownIntentError);
}

TEST(Classify, ExtractsLabelAndLandmark) {
  const auto cfg = PlannerConfig::defaults();
  const auto dir = campus_landmarks();
  EXPECT_EQ(classify("How many Moderate windows?", cfg).label, "Moderate");
  // "aggressive" is an AggressiveDriving keyword, which has priority.
  EXPECT_EQ(classify("count very aggressive events", cfg).category, IntentCategory::kAggressiveDriving);
  EXPECT_EQ(classify("How many slightly unstable windows", cfg).label, "Slightly Unstable");
  EXPECT_EQ(classify("Patterns near the library crosswalk?", cfg, &dir).landmark, "Library Crosswalk");
  EXPECT_EQ(classify("What happens around Mars Base?", cfg, &dir).landmark, "Mars Base");
}

TEST(Classify, AddingSynonymKeepsHigherPriorityMatches) {
  const std::vector<std::string> queries{
      "Where is driving most dangerous?", "unsafe stops near the library", "Which zones show the longest dwell times?",
      "How many moderate events?",       "idle time near union square",   "compare routes",
      "count harsh turns",               "patterns at tech square"};
  const auto base = PlannerConfig::defaults();
  for (auto cat : kAllCategories) {
    if (cat == IntentCategory::kMicroEvent) continue;
    auto cfg = base;
    cfg.lexicon[cat].push_back("zones");
    for (const auto& q : queries) {
      const auto before = classify(q, base).category;
      if (static_cast<int>(before) < static_cast<int>(cat)) {
        EXPECT_EQ(classify(q, cfg).category, before) << q;
      }
    }
  }
}

TEST(Settings, MacroAndMicro) {
  for (auto c : kAllCategories) {
    const auto s = settings_for(c);
    if (c == IntentCategory::kMicroEvent) {
      EXPECT_EQ(s.temperature, 0.5);
      EXPECT_EQ(s.max_tokens, 150);
    } else {
      EXPECT_EQ(s.temperature, 0.7);
      EXPECT_EQ(s.max_tokens, 500);
    }
  }
}

TEST(PlannerConfig, JsonRoundTripAndValidation) {
  auto cfg = PlannerConfig::defaults();
  cfg.top_k = 4;
  cfg.lexicon[IntentCategory::kDwellTime].push_back("parked");
  const auto back = PlannerConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.top_k, 4u);
  EXPECT_EQ(back.lexicon, cfg.lexicon);
  EXPECT_THROW(PlannerConfig::from_json({{"top_k", 0}}), ConfigurationError);
  EXPECT_THROW(PlannerConfig::from_json({{"lexicon", {{"Bogus", {"x"}}}}}), ConfigurationError);
  EXPECT_THROW(PlannerConfig::from_json({{"lexicon", {{"MicroEvent", {"x"}}}}}), ConfigurationError);
  EXPECT_THROW(PlannerConfig::from_json({{"spatial_radius_m", "far"}}), ConfigurationError);
}

TEST(NearestLandmark, AgreesWithLinearScan) {
  const auto dir = campus_landmarks();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lat(33.76, 33.79), lon(-84.41, -84.38);
  for (int i = 0; i < 50; ++i) {
    const LatLon p{lat(rng), lon(rng)};
    std::string best;
    double best_d = 1e18;
    for (const auto& lm : dir.entries()) {
      const double d = haversine_m(p, {lm.lat, lm.lon});
      if (d < best_d || (d == best_d && lm.name < best)) {
        best_d = d;
        best = lm.name;
      }
    }
    const auto got = nearest_landmark(p, dir);
    EXPECT_EQ(got.name, best);
    EXPECT_EQ(got.distance_m, best_d);
  }
}

TEST(Retrieve, AggressiveHotspotsMatchGroupBy) {
  const auto dir = campus_landmarks();
  const auto& sh = shaped();
  const auto cfg = PlannerConfig::defaults();
  const auto ctx = retrieve(classify("where is it dangerous", cfg), sh.windows, sh.model, dir, cfg);

  std::map<std::string, std::pair<std::int64_t, double>> oracle;
  std::int64_t aggressive = 0;
  for (const auto& w : sh.windows) {
    if (w.label != "Aggressive" && w.label != "Very Aggressive") continue;
    ++aggressive;
    if (w.summary.gps_quality == GpsQuality::kNone) continue;
    const auto& lm = nearest_landmark(anchor_of(w.summary), dir).name;
    ++oracle[lm].first;
    oracle[lm].second += w.summary.mag_variance;
  }
  std::vector<std::pair<std::int64_t, std::string>> ranked;
  for (const auto& [name, v] : oracle) ranked.push_back({-v.first, name});
  std::sort(ranked.begin(), ranked.end());

  EXPECT_EQ(ctx.total_events, 1219);
  EXPECT_EQ(ctx.focus_count, aggressive);
  ASSERT_EQ(ctx.hotspots.size(), std::min<std::size_t>(3, ranked.size()));
  for (std::size_t i = 0; i < ctx.hotspots.size(); ++i) {
    const auto& name = ranked[i].second;
    EXPECT_EQ(ctx.hotspots[i].landmark, name);
    EXPECT_EQ(ctx.hotspots[i].events, oracle[name].first);
    EXPECT_NEAR(ctx.hotspots[i].mean_instability, oracle[name].second / oracle[name].first, 1e-12);
  }
  // The planted Very Aggressive cluster sits at the library crosswalk.
  EXPECT_EQ(ctx.hotspots.front().landmark, "Library Crosswalk");
}

TEST(Retrieve, PlantedHotspotRanksFirst) {
  const auto dir = campus_landmarks();
  const auto& sh = shaped();
  std::vector<LabeledWindow> w;
  int idx = 0;
  for (int i = 0; i < 7; ++i) w.push_back({window("v", idx++, 33.77610, -84.39820, 1.0), "Aggressive"});
  for (int i = 0; i < 3; ++i) w.push_back({window("v", idx++, 33.77680, -84.38950, 2.0), "Very Aggressive"});
  for (int i = 0; i < 20; ++i) w.push_back({window("v", idx++, 33.77680, -84.38950), "Calm"});
  const auto ctx = retrieve(classify("harsh", PlannerConfig::defaults()), w, sh.model, dir,
                            PlannerConfig::defaults());
  ASSERT_EQ(ctx.hotspots.size(), 2u);
  EXPECT_EQ(ctx.hotspots[0].landmark, "Union Square");
  EXPECT_EQ(ctx.hotspots[0].events, 7);
  EXPECT_EQ(ctx.hotspots[1].landmark, "Tech Square");
  EXPECT_DOUBLE_EQ(ctx.hotspots[1].mean_instability, 2.0);
}

TEST(Retrieve, CountsModerateWindows) {
  const auto& sh = shaped();
  const auto cfg = PlannerConfig::defaults();
  const auto ctx = retrieve(classify("How many moderate windows?", cfg), sh.windows, sh.model,
                            campus_landmarks(), cfg);
  EXPECT_EQ(ctx.focus_count, 593);
  ASSERT_EQ(ctx.label_counts.size(), 5u);
  const std::vector<std::int64_t> expected{186, 593, 260, 164, 16};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(ctx.label_counts[i].label, kBehaviorLabels[i]);
    EXPECT_EQ(ctx.label_counts[i].count, expected[i]);
  }
}

TEST(Retrieve, EmptyWindowSetGivesZeroCounts) {
  const auto& sh = shaped();
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();
  const std::vector<LabeledWindow> none;
  for (auto q : {"dangerous", "dwell", "how many moderate", "route", "near union square"}) {
    const auto ctx = retrieve(classify(q, cfg, &dir), none, sh.model, dir, cfg);
    EXPECT_EQ(ctx.total_events, 0) << q;
    EXPECT_TRUE(ctx.hotspots.empty());
    EXPECT_TRUE(ctx.dwell.empty());
    EXPECT_EQ(ctx.focus_count, 0);
    for (const auto& c : ctx.label_counts) EXPECT_EQ(c.count, 0);
  }
}

TEST(Retrieve, DwellRunsAttributedToNearestLandmark) {
  const auto& sh = shaped();
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();
  std::vector<LabeledWindow> w;
  // Four stationary windows at Student Center (3 m jitter), one move, then
  // three stationary windows at Tech Square; a GPS-less window breaks runs.
  const double jitter = 3.0 / 111'320.0;
  for (int i = 0; i < 4; ++i) w.push_back({window("a", i, 33.77380 + (i % 2) * jitter, -84.39860), "Calm"});
  for (int i = 4; i < 7; ++i) w.push_back({window("a", i, 33.77680, -84.38950), "Calm"});
  w.push_back({window("a", 7, 33.77680, -84.38950, 0.1, GpsQuality::kNone), "Calm"});
  w.push_back({window("a", 8, 33.77680, -84.38950), "Calm"});
  // Different vehicle at the same spot does not extend a run.
  w.push_back({window("b", 8, 33.77680, -84.38950), "Calm"});
  const auto ctx = retrieve(classify("idle", cfg), w, sh.model, dir, cfg);
  EXPECT_EQ(ctx.total_stops, 2);
  EXPECT_DOUBLE_EQ(ctx.total_dwell_minutes, 7.0);
  ASSERT_EQ(ctx.dwell.size(), 2u);
  EXPECT_EQ(ctx.dwell[0].landmark, "Student Center");
  EXPECT_DOUBLE_EQ(ctx.dwell[0].minutes, 4.0);
  EXPECT_EQ(ctx.dwell[1].landmark, "Tech Square");
  EXPECT_DOUBLE_EQ(ctx.dwell[1].minutes, 3.0);
}

TEST(Retrieve, RouteBucketsByHour) {
  const auto& sh = shaped();
  const auto cfg = PlannerConfig::defaults();
  std::vector<LabeledWindow> w;
  // 60 windows in hour 14 moving 100 m each, then 60 stationary in hour 15.
  const double step = 100.0 / 111'195.0;
  for (int i = 0; i < 60; ++i) w.push_back({window("a", i, 33.77 + i * step, -84.39), "Calm"});
  for (int i = 60; i < 120; ++i) w.push_back({window("a", i, 33.77 + 59 * step, -84.39), "Calm"});
  const auto ctx = retrieve(classify("route", cfg), w, sh.model, campus_landmarks(), cfg);
  ASSERT_EQ(ctx.buckets.size(), 2u);
  EXPECT_EQ(ctx.buckets[0].hour, 14);
  EXPECT_EQ(ctx.buckets[0].windows, 60);
  EXPECT_EQ(ctx.buckets[0].moves, 59);
  EXPECT_NEAR(ctx.buckets[0].mean_displacement_m, 100.0, 0.5);
  EXPECT_EQ(ctx.buckets[0].dwell_fraction, 0.0);
  EXPECT_EQ(ctx.buckets[1].moves, 60);
  EXPECT_EQ(ctx.buckets[1].dwell_fraction, 1.0);
}

TEST(Retrieve, SpatialMatchesHaversineFilter) {
  const auto& sh = shaped();
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();
  for (const auto& lm : dir.entries()) {
    const auto ctx = retrieve(classify("patterns at " + lm.name, cfg, &dir), sh.windows, sh.model, dir, cfg);
    std::map<std::string, std::int64_t> oracle;
    std::int64_t total = 0;
    for (const auto& w : sh.windows) {
      if (w.summary.gps_quality == GpsQuality::kNone) continue;
      if (haversine_m({lm.lat, lm.lon}, anchor_of(w.summary)) > 250.0) continue;
      ++oracle[w.label];
      ++total;
    }
    EXPECT_EQ(ctx.focus_landmark, lm.name);
    EXPECT_EQ(ctx.focus_count, total) << lm.name;
    for (const auto& c : ctx.label_counts) EXPECT_EQ(c.count, oracle[c.label]) << lm.name << c.label;
  }
  EXPECT_THROW(retrieve(classify("around Mars Base", cfg, &dir), sh.windows, sh.model, dir, cfg),
               UnknownLandmarkError);
}

TEST(Retrieve, MicroNeighborhood) {
  const auto& sh = shaped();
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();
  const auto it = std::find_if(sh.windows.begin(), sh.windows.end(),
                               [](const LabeledWindow& w) { return w.label == "Very Aggressive"; });
  ASSERT_NE(it, sh.windows.end());
  const auto ctx = retrieve(micro_intent(key_of(it->summary)), sh.windows, sh.model, dir, cfg);
  ASSERT_TRUE(ctx.micro.has_value());
  EXPECT_EQ(ctx.micro->label, "Very Aggressive");
  EXPECT_EQ(ctx.micro->landmark, nearest_landmark(anchor_of(it->summary), dir).name);
  std::int64_t n = 0;
  for (const auto& w : sh.windows) {
    if (&w == &*it || w.summary.gps_quality == GpsQuality::kNone) continue;
    if (haversine_m(anchor_of(w.summary), anchor_of(it->summary)) <= 100.0) ++n;
  }
  EXPECT_EQ(ctx.micro->neighbors, n);
  std::int64_t sum = 0;
  for (const auto& c : ctx.micro->neighborhood) sum += c.count;
  EXPECT_EQ(sum, n);

  EXPECT_THROW(retrieve(micro_intent({"nope", 1}), sh.windows, sh.model, dir, cfg), UnknownEventError);
  Intent bare;
  bare.category = IntentCategory::kMicroEvent;
  EXPECT_THROW(retrieve(bare, sh.windows, sh.model, dir, cfg), UnknownEventError);
  EXPECT_THROW(retrieve(bare, sh.windows, sh.model, LandmarkDirectory{}, cfg), ConfigurationError);
}

TEST(Retrieve, DeterministicAndOrderIndependent) {
  const auto& sh = shaped();
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();
  auto shuffled = sh.windows;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
  for (auto q : {"dangerous", "dwell", "how many calm", "route", "near tech square"}) {
    const auto intent = classify(q, cfg, &dir);
    EXPECT_EQ(retrieve(intent, sh.windows, sh.model, dir, cfg).to_json(),
              retrieve(intent, shuffled, sh.model, dir, cfg).to_json())
        << q;
  }
}

TEST(BuildPrompt, RendersSummaryBoxNumbers) {
  ContextSummary c;
  c.category = IntentCategory::kAggressiveDriving;
  c.model_version = 1;
  c.total_events = 2450;
  c.focus_count = 34;
  c.observed_from = kT0;
  c.observed_to = kT0 + 2 * 3'600'000;
  c.hotspots = {{"Library Crosswalk", 15, 0.87}, {"Union Square", 11, 0.75}, {"Tech Square", 8, 0.81}};
  Intent intent;
  intent.query = "Where is driving most dangerous?";
  const auto plan = build_prompt(intent, c);
  for (auto s : {"Total events: 2,450", "Library Crosswalk: 15 events, instability 0.87",
                 "Union Square: 11 events, instability 0.75", "Tech Square: 8 events, instability 0.81"}) {
    EXPECT_NE(plan.context_block.find(s), std::string::npos) << s;
  }
  EXPECT_NE(plan.context_block.find("Observation window: 2024-10-21 14:00-16:00 UTC"), std::string::npos);
  EXPECT_EQ(plan.temperature, 0.7);
  EXPECT_EQ(plan.max_tokens, 500);
  EXPECT_NE(plan.prompt_text.find(plan.context_block), std::string::npos);
  EXPECT_NE(plan.prompt_text.find(intent.query), std::string::npos);
}

TEST(BuildPrompt, ZeroCountContextAsksForNoData) {
  ContextSummary c;
  c.category = IntentCategory::kDwellTime;
  Intent intent;
  intent.category = IntentCategory::kDwellTime;
  intent.query = "idle";
  const auto plan = build_prompt(intent, c);
  EXPECT_NE(plan.prompt_text.find("Total events: 0"), std::string::npos);
  EXPECT_NE(plan.prompt_text.find("no data is available"), std::string::npos);
}

TEST(BuildPrompt, EveryCategoryIsGroundedAndBounded) {
  const auto& sh = shaped();
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();
  std::vector<Intent> intents;
  for (auto q : {"dangerous", "dwell", "how many moderate", "compare routes", "near union square"}) {
    intents.push_back(classify(q, cfg, &dir));
  }
  intents.push_back(micro_intent(key_of(sh.windows[100].summary)));
  const std::regex capitalized(R"(\b[A-Z][a-z]+(?: [A-Z][a-z]+)+\b)");
  for (const auto& intent : intents) {
    const auto plan = build_prompt(intent, retrieve(intent, sh.windows, sh.model, dir, cfg));
    const auto tokens = reference_tokenize(plan.context_block);
    EXPECT_GE(tokens, 50) << to_string(intent.category);
    EXPECT_LE(tokens, 400) << to_string(intent.category);
    EXPECT_EQ(plan.max_tokens, intent.is_micro() ? 150 : 500);
    for (const auto& name : plan.context.landmarks()) EXPECT_TRUE(dir.contains(name)) << name;
    // Multi-word capitalized phrases in the block are landmarks or labels.
    for (std::sregex_iterator it(plan.context_block.begin(), plan.context_block.end(), capitalized), end;
         it != end; ++it) {
      const auto phrase = it->str();
      const bool label = std::find(kBehaviorLabels.begin(), kBehaviorLabels.end(), phrase) != kBehaviorLabels.end();
      EXPECT_TRUE(label || dir.contains(phrase) || phrase == "Very Aggressive" || phrase == "Total events" ||
                  phrase == "Observation window" || phrase == "Counts by" || phrase == "Selected event")
          << phrase;
    }
  }
}

TEST(GroupThousands, Formats) {
  EXPECT_EQ(group_thousands(0), "0");
  EXPECT_EQ(group_thousands(999), "999");
  EXPECT_EQ(group_thousands(2450), "2,450");
  EXPECT_EQ(group_thousands(1234567), "1,234,567");
  EXPECT_EQ(group_thousands(-1000), "-1,000");
}

}  // namespace
}  // namespace fleetlens
