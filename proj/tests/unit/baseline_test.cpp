// Copyright 2026 The FleetLens Authors
// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <deque>
#include <random>

#include <gtest/gtest.h>

#include "fleetlens/baseline.hpp"
#include "fleetlens/codec.hpp"
#include "fleetlens/errors.hpp"
#include "fleetlens/synthetic.hpp"

namespace fleetlens {
namespace {

// Records of exactly `tokens` reference tokens each.
std::vector<std::string> records(std::size_t count, std::int64_t tokens) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string r = "{\"i\":" + std::to_string(i) + ",\"pad\":\"";
    r.resize(static_cast<std::size_t>(tokens * 4 - 2), 'x');
    out.push_back(r + "\"}");
  }
  return out;
}

std::int64_t total_tokens(const std::vector<std::string>& r) {
  std::int64_t t = 0;
  for (const auto& s : r) t += reference_tokenize(s);
  return t;
}

TEST(Chunking, TwelveThousandTokensGiveFourChunksAndFiveCalls) {
  const auto data = records(120, 100);
  ASSERT_EQ(total_tokens(data), 12'000);
  const auto chunks = chunk_records(data);
  EXPECT_EQ(chunks.size(), 4u);
  for (const auto& c : chunks) EXPECT_LE(c.tokens, 3000);

  LlmGateway gw(std::make_shared<MockBackend>());
  const auto run = run_llm_only("How many moderate windows?", data, gw);
  EXPECT_EQ(run.usage.api_calls, 5);
  EXPECT_EQ(run.usage.strategy, Strategy::kLlmOnly);
}

TEST(Chunking, LargeDatasetsCapAtSixCalls) {
  for (std::size_t n : {151u, 400u, 1000u}) {
    const auto data = records(n, 100);
    ASSERT_GT(total_tokens(data), 15'000);
    LlmGateway gw(std::make_shared<MockBackend>());
    const auto run = run_llm_only("Where is driving most dangerous?", data, gw);
    EXPECT_EQ(run.usage.api_calls, 6) << n;
    EXPECT_EQ(run.usage.cost_usd, cost_usd(run.usage.input_tokens, run.usage.output_tokens));
  }
}

TEST(Chunking, CallsAreMinOfChunksAndFivePlusOne) {
  for (std::size_t n = 1; n <= 200; n += 13) {
    const auto data = records(n, 70);
    const auto chunks = chunk_records(data);
    LlmGateway gw(std::make_shared<MockBackend>());
    const auto run = run_llm_only("route efficiency", data, gw);
    EXPECT_EQ(run.usage.api_calls, static_cast<int>(std::min<std::size_t>(chunks.size(), 5) + 1));
  }
}

TEST(Chunking, PartitionsRecordsByReconcatenation) {
  std::mt19937_64 rng(6);
  std::vector<std::string> data;
  for (int i = 0; i < 500; ++i) {
    data.push_back("{\"k\":" + std::to_string(i) + ",\"v\":\"" + std::string(rng() % 2000, 'y') + "\"}");
  }
  data.push_back(std::string(20'000, 'z'));  // oversized record
  const auto chunks = chunk_records(data);
  std::string joined, rejoined;
  std::size_t next = 0;
  for (const auto& c : chunks) {
    EXPECT_EQ(c.first_record, next);
    EXPECT_GT(c.record_count, 0u);
    if (c.record_count > 1) EXPECT_LE(c.tokens, 3000);
    next += c.record_count;
    rejoined += c.text + '\n';
  }
  EXPECT_EQ(next, data.size());
  for (const auto& r : data) joined += r + '\n';
  EXPECT_EQ(joined, rejoined);
  EXPECT_EQ(chunks.back().text, data.back());
  EXPECT_THROW(chunk_records(data, 0), ConfigurationError);
}

TEST(Sampling, EvenlySpacedIndices) {
  EXPECT_EQ(sample_chunk_indices(3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(sample_chunk_indices(5), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(sample_chunk_indices(6), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(sample_chunk_indices(12), (std::vector<std::size_t>{0, 2, 4, 7, 9}));
  EXPECT_EQ(sample_chunk_indices(100), (std::vector<std::size_t>{0, 20, 40, 60, 80}));
  EXPECT_TRUE(sample_chunk_indices(0).empty());
}

TEST(LlmOnly, EmptyDatasetIsAnError) {
  LlmGateway gw(std::make_shared<MockBackend>());
  EXPECT_THROW(run_llm_only("q", std::vector<std::string>{}, gw), InsufficientDataError);
}

class FailOnCall : public LlmBackend {
 public:
  explicit FailOnCall(int n) : n_(n) {}
  BackendResponse generate(const ChatRequest& r) override {
    if (++calls_ == n_) throw BackendError(BackendError::Kind::kHttp, "bad request", 400);
    return inner_.generate(r);
  }
  std::string name() const override { return "fail-on-call"; }

 private:
  int n_;
  std::atomic<int> calls_{0};
  MockBackend inner_;
};

TEST(LlmOnly, FailureKeepsPartialUsage) {
  LlmGateway gw(std::make_shared<FailOnCall>(3));
  try {
    run_llm_only("q", records(400, 100), gw);
    FAIL();
  } catch (const PartialRunError& e) {
    EXPECT_EQ(e.usage().api_calls, 2);
    EXPECT_GT(e.usage().input_tokens, 5000);
    EXPECT_EQ(e.status(), 400);
  }
}

TEST(JsonlRecords, ShortensKeysAndSkipsBlankLines) {
  WindowSummary s;
  s.vehicle_id = "bus-01";
  s.window_start = 1729519200000;
  s.window_duration_s = 60;
  s.sample_count = 3000;
  const std::string full = encode_summary(s);
  const auto r = jsonl_records(full + "\n\n" + full + "\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], shorten_keys(full));
  EXPECT_LT(r[0].size(), full.size());
}

TEST(Grounded, OneCallThenCached) {
  const auto data = generate_shaped_dataset(shaped_modes(), campus_landmarks());
  std::vector<FeatureVector> f;
  for (const auto& s : data.summaries) f.push_back(extract_features(s));
  const auto model = fit(f, 5);
  const auto windows = label_snapshot(data.summaries, model);
  const auto dir = campus_landmarks();
  const auto cfg = PlannerConfig::defaults();

  std::vector<std::string> raw;
  for (const auto& s : data.summaries) raw.push_back(shorten_keys(encode_summary(s)));

  for (auto q : {"Where is driving most dangerous?", "Which zones show the longest dwell times?",
                 "How many moderate windows were there?", "Compare morning and evening efficiency",
                 "What patterns are near Union Square?"}) {
    const auto intent = classify(q, cfg, &dir);
    const auto plan = build_prompt(intent, retrieve(intent, windows, model, dir, cfg));
    LlmGateway gw(std::make_shared<MockBackend>());
    const auto cold = run_grounded(plan, gw);
    EXPECT_EQ(cold.usage.api_calls, 1) << q;
    EXPECT_EQ(cold.usage.strategy, Strategy::kGrounded);
    EXPECT_EQ(cold.usage.temperature, 0.7);
    const auto warm = run_grounded(plan, gw);
    EXPECT_EQ(warm.usage.api_calls, 0);
    EXPECT_EQ(warm.usage.cache_hits, 1);
    EXPECT_EQ(warm.completion.text, cold.completion.text);

    LlmGateway fresh(std::make_shared<MockBackend>());
    const auto baseline = run_llm_only(q, raw, fresh);
    EXPECT_EQ(baseline.usage.api_calls, 6);
    const double ratio = static_cast<double>(cold.usage.total_tokens()) /
                         static_cast<double>(baseline.usage.total_tokens());
    EXPECT_LT(ratio, 0.02) << q << " ratio " << ratio;
  }
}

}  // namespace
}  // namespace fleetlens
