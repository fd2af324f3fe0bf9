// Copyright 2026 The FleetLens Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <random>
#include <regex>

#include <gtest/gtest.h>

#include "fleetlens/errors.hpp"
#include "fleetlens/llm_gateway.hpp"
#include "fleetlens/synthetic.hpp"
#include "fleetlens/validator.hpp"

namespace fleetlens {
namespace {

// Independent extraction: a grouped-number alternative first, then plain
// decimals; the sign is decided from the two preceding characters.
std::vector<double> regex_numbers(const std::string& text) {
  static const std::regex re(R"(\d{1,3}(?:,\d{3})+(?!\d)(?:\.\d+)?|\d+(?:\.\d+)?)");
  std::vector<double> out;
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) {
    std::string s = it->str();
    s.erase(std::remove(s.begin(), s.end(), ','), s.end());
    double v = std::stod(s);
    const auto pos = static_cast<std::size_t>(it->position());
    if (pos >= 1 && text[pos - 1] == '-') {
      const bool glued = pos >= 2 && (std::isalnum(static_cast<unsigned char>(text[pos - 2])) || text[pos - 2] == '-');
      if (!glued) v = -v;
    }
    out.push_back(v);
  }
  return out;
}

QueryPlan summary_box_plan() {
  ContextSummary c;
  c.category = IntentCategory::kAggressiveDriving;
  c.model_version = 1;
  c.total_events = 2450;
  c.focus_count = 34;
  c.observed_from = kDemoStart;
  c.observed_to = kDemoStart + 2 * 3'600'000;
  c.hotspots = {{"Library Crosswalk", 15, 0.87}, {"Union Square", 11, 0.75}, {"Tech Square", 8, 0.81}};
  Intent intent;
  intent.query = "Where is driving most dangerous?";
  return build_prompt(intent, c);
}

TEST(Score, FormulaAndThresholds) {
  const int expected[] = {100, 80, 60, 40, 20, 0, 0, 0};
  for (std::size_t n = 0; n < 8; ++n) EXPECT_EQ(confidence_score(n), expected[n]);
  for (int s = 0; s <= 100; ++s) {
    const auto d = disposition_for(s);
    EXPECT_EQ(d, s >= 80 ? Disposition::kPresent : s >= 60 ? Disposition::kReview : Disposition::kRetry);
  }
  for (std::size_t n = 1; n < 11; ++n) EXPECT_LE(confidence_score(n), confidence_score(n - 1));
}

TEST(ExtractNumbers, Examples) {
  EXPECT_EQ(extract_numbers("15 events, instability 0.87"), (std::vector<double>{15, 0.87}));
  EXPECT_TRUE(extract_numbers("").empty());
  EXPECT_EQ(extract_numbers("Total events: 2,450"), (std::vector<double>{2450}));
  EXPECT_EQ(extract_numbers("a 98.3% drop"), (std::vector<double>{98.3}));
  EXPECT_EQ(extract_numbers("1,234,567.5 m"), (std::vector<double>{1234567.5}));
  EXPECT_EQ(extract_numbers("counts 15, 11, 8"), (std::vector<double>{15, 11, 8}));
  EXPECT_EQ(extract_numbers("-84.3958 and bus-01"), (std::vector<double>{-84.3958, 1}));
  EXPECT_EQ(extract_numbers("14:00-16:00"), (std::vector<double>{14, 0, 16, 0}));
}

TEST(ExtractNumbers, MatchesRegexOracleOnTemplatedSentences) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> words{"events", "near", "Union Square", "instability", "m", "%",
                                       "bus-", "v", "at", "(", ")", ":", ";", "-", "--", "x-"};
  auto number = [&]() -> std::string {
    switch (rng() % 6) {
      case 0: return std::to_string(rng() % 100);
      case 1: return std::to_string(rng() % 10'000'000);
      case 2: {
        const auto v = rng() % 100'000'000;
        std::string d = std::to_string(v), g;
        for (std::size_t i = 0; i < d.size(); ++i) {
          g.push_back(d[i]);
          if ((d.size() - i - 1) % 3 == 0 && i + 1 < d.size()) g.push_back(',');
        }
        return g;
      }
      case 3: return std::to_string(rng() % 1000) + "." + std::to_string(rng() % 1000);
      case 4: return std::to_string(rng() % 100) + "," + std::to_string(rng() % 10000);
      default: return std::to_string(rng() % 50) + "." + std::to_string(rng() % 50) + "." + std::to_string(rng() % 9);
    }
  };
  for (int t = 0; t < 2000; ++t) {
    std::string s;
    const int parts = 1 + static_cast<int>(rng() % 12);
    for (int p = 0; p < parts; ++p) {
      const auto sep = rng() % 4;
      if (sep == 0) s += " ";
      if (sep == 1) s += ", ";
      if (rng() % 2) {
        s += number();
      } else {
        s += words[rng() % words.size()];
      }
    }
    ASSERT_EQ(extract_numbers(s), regex_numbers(s)) << s;
  }
}

TEST(PlaceCandidates, PatternAndTrimming) {
  const ValidatorConfig cfg;
  EXPECT_EQ(place_candidates("Most events happen Near Union Square today.", cfg),
            (std::vector<std::string>{"Union Square"}));
  EXPECT_EQ(place_candidates("The shuttle idled at Maple Street.", cfg),
            (std::vector<std::string>{"Maple Street"}));
  EXPECT_EQ(place_candidates("It passed Quarry Hall, then West Campus Housing.", cfg),
            (std::vector<std::string>{"Quarry Hall", "West Campus Housing"}));
  // Labels and headings are not places; a single capitalized word is not either.
  EXPECT_TRUE(place_candidates("Very Aggressive and Slightly Unstable windows in Atlanta.", cfg).empty());
  // Punctuation breaks a phrase.
  EXPECT_TRUE(place_candidates("Calm. Moderate.", cfg).empty());
}

TEST(Validate, SummaryBoxRestatementIsClean) {
  const auto plan = summary_box_plan();
  const auto dir = campus_landmarks();
  const auto r = validate(
      "Library Crosswalk leads with 15 events and instability 0.87, followed by Union Square "
      "(11 events, 0.75) and Tech Square (8 events, 0.81) out of 2,450 total events.",
      plan, dir);
  EXPECT_EQ(r.issue_count(), 0u) << r.to_json().dump();
  EXPECT_EQ(r.score, 100);
  EXPECT_EQ(r.disposition, Disposition::kPresent);
  // Formatting differences inside the tolerance still match.
  EXPECT_EQ(validate("instability 0.870", plan, dir).issue_count(), 0u);
}

TEST(Validate, InventedPlaceAndNumber) {
  const auto r = validate("Most harsh braking happens near Maple Street, with 17 events.",
                          summary_box_plan(), campus_landmarks());
  ASSERT_EQ(r.issue_count(), 2u);
  EXPECT_EQ(r.score, 60);
  EXPECT_EQ(r.disposition, Disposition::kReview);
  EXPECT_EQ(r.issues[0].kind, IssueKind::kFactual);
  EXPECT_EQ(r.issues[1].kind, IssueKind::kGeographic);
}

TEST(Validate, CountsDistinctInstancesAndClamps) {
  const auto r = validate("17 events, 17 again, 19, 23, 29, 31 near Maple Street and maple street.",
                          summary_box_plan(), campus_landmarks());
  // 17, 19, 23, 29, 31 and one unknown place.
  EXPECT_EQ(r.issue_count(), 6u);
  EXPECT_EQ(r.score, 0);
  EXPECT_EQ(r.disposition, Disposition::kRetry);
}

TEST(Validate, GenericPhrases) {
  const auto r = validate("As an AI, I cannot be sure. I’m sorry.", summary_box_plan(), campus_landmarks());
  EXPECT_EQ(r.issue_count(), 3u);
  for (const auto& i : r.issues) EXPECT_EQ(i.kind, IssueKind::kGenericAi);
}

TEST(Validate, BehavioralAlignmentForMicroEvents) {
  const auto dir = campus_landmarks();
  auto micro_plan = [](std::string label) {
    ContextSummary c;
    c.category = IntentCategory::kMicroEvent;
    c.total_events = 10;
    MicroContext m;
    m.key = {"bus-01", kDemoStart};
    m.label = std::move(label);
    c.micro = m;
    return build_prompt(micro_intent(m.key), c);
  };
  EXPECT_EQ(validate("A dangerous swerve.", micro_plan("Calm"), dir).issue_count(), 1u);
  EXPECT_EQ(validate("A smooth, gentle stop.", micro_plan("Calm"), dir).issue_count(), 0u);
  EXPECT_EQ(validate("A smooth, gentle stop.", micro_plan("Very Aggressive"), dir).issue_count(), 1u);
  EXPECT_EQ(validate("A severe, dangerous swerve.", micro_plan("Aggressive"), dir).issue_count(), 0u);
  // Macro plans never get behavioral issues.
  EXPECT_EQ(validate("A dangerous swerve.", summary_box_plan(), dir).issue_count(), 0u);
}

TEST(Validate, PureAndConfigurable) {
  const auto plan = summary_box_plan();
  const auto dir = campus_landmarks();
  const std::string text = "Near Maple Street, 17 events.";
  EXPECT_EQ(validate(text, plan, dir).to_json(), validate(text, plan, dir).to_json());

  auto cfg = ValidatorConfig::from_json({{"place_suffixes", {"Road"}}});
  EXPECT_EQ(place_candidates("past Elm Road", cfg), (std::vector<std::string>{"Elm Road"}));
  EXPECT_EQ(ValidatorConfig::from_json(cfg.to_json()).place_suffixes, cfg.place_suffixes);
  EXPECT_THROW(ValidatorConfig::from_json({{"relative_tolerance", -1}}), ConfigurationError);
}

TEST(Validate, HonestMockScoresFullAndCorruptingMockDoesNot) {
  const auto data = generate_shaped_dataset(shaped_modes(), campus_landmarks());
  std::vector<FeatureVector> f;
  for (const auto& s : data.summaries) f.push_back(extract_features(s));
  const auto model = fit(f, 5);
  const auto windows = label_snapshot(data.summaries, model);
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();

  std::vector<Intent> intents;
  for (auto q : {"Where is driving most dangerous?", "Which zones show the longest dwell times?",
                 "How many moderate windows?", "Compare morning and evening efficiency",
                 "Patterns near Student Center"}) {
    intents.push_back(classify(q, cfg, &dir));
  }
  for (std::size_t i = 0; i < windows.size(); i += 97) intents.push_back(micro_intent(key_of(windows[i].summary)));

  for (std::uint64_t seed : {1, 7, 99}) {
    MockBackend honest({MockOptions::Mode::kHonest, seed});
    MockBackend corrupt({MockOptions::Mode::kCorrupting, seed});
    for (const auto& intent : intents) {
      const auto plan = build_prompt(intent, retrieve(intent, windows, model, dir, cfg));
      const ChatRequest req{plan.prompt_text, plan.temperature, plan.max_tokens};
      const auto good = validate(honest.respond(req), plan, dir);
      EXPECT_EQ(good.score, 100) << to_string(intent.category) << good.to_json().dump();
      const auto bad = validate(corrupt.respond(req), plan, dir);
      EXPECT_LE(bad.score, 80) << to_string(intent.category);
    }
  }
}

}  // namespace
}  // namespace fleetlens
