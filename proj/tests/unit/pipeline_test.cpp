// Copyright 2026 The FleetLens Authors
// SPDX-License-Identifier: Apache-2.0
#include <thread>

#include <gtest/gtest.h>

#include "fleetlens/errors.hpp"
#include "shaped_engine.hpp"

namespace fleetlens {
namespace {

using testing::shaped_engine;

// Answers like a careless model until the prompt carries the grounding
// reminder, then like the honest mock.
class SloppyUntilReminded : public LlmBackend {
 public:
  explicit SloppyUntilReminded(std::string sloppy) : sloppy_(std::move(sloppy)) {}
  BackendResponse generate(const ChatRequest& r) override {
    ++calls;
    if (r.prompt.find(kGroundingReminder) != std::string::npos && !stubborn) return honest_.generate(r);
    return {sloppy_, reference_tokenize(r.prompt), reference_tokenize(sloppy_), 0.0};
  }
  std::string name() const override { return "sloppy"; }

  std::atomic<int> calls{0};
  bool stubborn = false;

 private:
  std::string sloppy_;
  MockBackend honest_;
};

TEST(Engine, HonestAnswerIsPresentedFirstTime) {
  auto engine = shaped_engine(std::make_shared<MockBackend>());
  const auto a = engine->answer("Where is driving most dangerous?");
  EXPECT_EQ(a.attempts, 1);
  EXPECT_EQ(a.validation.score, 100);
  EXPECT_EQ(a.usage.api_calls, 1);
  EXPECT_EQ(a.plan.intent.category, IntentCategory::kAggressiveDriving);
  const auto j = a.to_json();
  EXPECT_EQ(j.at("intent"), "AggressiveDriving");
  EXPECT_EQ(j.at("validation").at("disposition"), "present");

  const auto again = engine->answer("Where is driving most dangerous?");
  EXPECT_EQ(again.usage.api_calls, 0);
  EXPECT_EQ(again.completion.text, a.completion.text);
}

TEST(Engine, LowScoreIsRetriedOnceWithReminder) {
  auto backend = std::make_shared<SloppyUntilReminded>(
      "I'm sorry, as an AI I cannot say. Maybe 17 or 19 events near Maple Street.");
  auto engine = shaped_engine(backend);
  const auto a = engine->answer("How many moderate windows?");
  EXPECT_EQ(a.attempts, 2);
  EXPECT_EQ(a.validation.score, 100);
  EXPECT_EQ(a.usage.api_calls, 2);
  EXPECT_EQ(backend->calls, 2);
  EXPECT_EQ(a.plan.prompt_text.find(kGroundingReminder), std::string::npos);
}

TEST(Engine, KeepsFirstAttemptWhenRetryIsNoBetter) {
  auto backend = std::make_shared<SloppyUntilReminded>("As an AI I cannot. I'm sorry.");
  backend->stubborn = true;
  auto engine = shaped_engine(backend);
  const auto a = engine->answer("How many moderate windows?");
  EXPECT_EQ(a.attempts, 2);
  EXPECT_EQ(a.validation.disposition, Disposition::kRetry);
  EXPECT_EQ(backend->calls, 2);
}

TEST(Engine, ReviewScoreIsNotRetried) {
  auto engine = shaped_engine(std::make_shared<MockBackend>(MockOptions{MockOptions::Mode::kCorrupting}));
  const auto a = engine->answer("Where is driving most dangerous?");
  EXPECT_LE(a.validation.score, 80);
  EXPECT_GE(a.validation.score, 60);
  EXPECT_EQ(a.attempts, 1);
}

TEST(Engine, MicroEventUsesMicroSettings) {
  auto engine = shaped_engine(std::make_shared<MockBackend>());
  const auto& w = engine->windows()->at(10);
  const auto a = engine->explain(key_of(w.summary));
  EXPECT_EQ(a.plan.temperature, 0.5);
  EXPECT_EQ(a.plan.max_tokens, 150);
  EXPECT_LE(a.completion.output_tokens, 150);
  EXPECT_EQ(a.validation.score, 100);
  EXPECT_EQ(a.plan.context.micro->label, w.label);
  EXPECT_THROW(engine->explain({"nope", 0}), UnknownEventError);
}

TEST(Engine, ErrorsSurfaceTyped) {
  auto engine = shaped_engine(std::make_shared<MockBackend>());
  EXPECT_THROW(engine->answer("hello there"), UnknownIntentError);
  EXPECT_THROW(engine->answer("patterns around Mars Base"), UnknownLandmarkError);
}

TEST(Engine, LlmOnlyBaselineOverSameStore) {
  auto engine = shaped_engine(std::make_shared<MockBackend>());
  const auto base = engine->run_llm_only("Where is driving most dangerous?");
  EXPECT_EQ(base.usage.api_calls, 6);
  const auto grounded = engine->answer("Where is driving most dangerous?");
  EXPECT_LT(grounded.usage.total_tokens() * 50, base.usage.total_tokens());
}

TEST(Engine, RefreshPicksUpNewWindows) {
  auto engine = shaped_engine(std::make_shared<MockBackend>());
  const auto before = engine->windows();
  auto extra = before->front().summary;
  extra.vehicle_id = "bus-99";
  SummaryStore shared = engine->store();  // same backend
  shared.put(extra);
  EXPECT_EQ(engine->windows()->size(), before->size());
  engine->refresh();
  EXPECT_EQ(engine->windows()->size(), before->size() + 1);
  EXPECT_EQ(before->size(), 1219u);  // old snapshot untouched
}

TEST(Engine, ConcurrentQueries) {
  auto engine = shaped_engine(std::make_shared<MockBackend>());
  const std::vector<std::string> qs{"dangerous", "dwell", "how many calm", "route", "near tech square"};
  std::vector<std::thread> threads;
  std::atomic<int> clean{0};
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        if (engine->answer(qs[(t + i) % qs.size()]).validation.score == 100) ++clean;
      }
      if (t % 2 == 0) engine->refresh();
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(clean.load(), 60);
}

}  // namespace
}  // namespace fleetlens
