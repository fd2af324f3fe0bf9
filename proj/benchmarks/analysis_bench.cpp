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


#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "fleetlens/clustering.hpp"
#include "fleetlens/codec.hpp"
#include "fleetlens/llm_gateway.hpp"
#include "fleetlens/object_store.hpp"
#include "fleetlens/pipeline.hpp"
#include "fleetlens/query_planner.hpp"
#include "fleetlens/summary_store.hpp"
#include "fleetlens/synthetic.hpp"
#include "fleetlens/validator.hpp"

namespace fl = fleetlens;

namespace {

const fl::ShapedDataset& shaped() {
  static const auto d = fl::generate_shaped_dataset(fl::shaped_modes(), fl::campus_landmarks());
  return d;
}

std::vector<fl::FeatureVector> shaped_features() {
  std::vector<fl::FeatureVector> f;
  for (const auto& s : shaped().summaries) f.push_back(fl::extract_features(s));
  return f;
}

void BM_FitK5(benchmark::State& state) {
  const auto f = shaped_features();
  for (auto _ : state) benchmark::DoNotOptimize(fl::fit(f, 5));
}
BENCHMARK(BM_FitK5)->Unit(benchmark::kMillisecond);

void BM_StoreScanNear(benchmark::State& state) {
  fl::SummaryStore store(std::make_shared<fl::MemoryObjectStore>());
  for (const auto& s : shaped().summaries) store.put(s);
  const auto lm = fl::campus_landmarks().entries().front();
  fl::QueryFilter f;
  f.near = fl::GeoCircle{lm.lat, lm.lon, 150.0};
  for (auto _ : state) benchmark::DoNotOptimize(store.scan(f));
}
BENCHMARK(BM_StoreScanNear);

void BM_RetrieveAndPrompt(benchmark::State& state) {
  const auto f = shaped_features();
  const auto model = fl::fit(f, 5);
  const auto windows = fl::label_snapshot(shaped().summaries, model);
  const auto dir = fl::campus_landmarks();
  const auto cfg = fl::PlannerConfig::defaults();
  const auto intent = fl::classify("Where is driving most dangerous?", cfg, &dir);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fl::build_prompt(intent, fl::retrieve(intent, windows, model, dir, cfg)));
  }
}
BENCHMARK(BM_RetrieveAndPrompt);

void BM_Validate(benchmark::State& state) {
  const auto f = shaped_features();
  const auto model = fl::fit(f, 5);
  const auto windows = fl::label_snapshot(shaped().summaries, model);
  const auto dir = fl::campus_landmarks();
  const auto cfg = fl::PlannerConfig::defaults();
  const auto intent = fl::classify("Where is driving most dangerous?", cfg, &dir);
  const auto plan = fl::build_prompt(intent, fl::retrieve(intent, windows, model, dir, cfg));
  fl::MockBackend mock;
  const auto text = mock.respond({plan.prompt_text, plan.temperature, plan.max_tokens});
  for (auto _ : state) benchmark::DoNotOptimize(fl::validate(text, plan, dir));
}
BENCHMARK(BM_Validate);

void BM_GatewayCacheHit(benchmark::State& state) {
  fl::LlmGateway gw(std::make_shared<fl::MockBackend>());
  const std::string prompt(4000, 'x');
  gw.complete(prompt, 0.7, 500);
  for (auto _ : state) benchmark::DoNotOptimize(gw.complete(prompt, 0.7, 500));
}
BENCHMARK(BM_GatewayCacheHit);

}  // namespace

BENCHMARK_MAIN();
