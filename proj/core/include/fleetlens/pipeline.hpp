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

#ifndef FLEETLENS_PIPELINE_HPP_
#define FLEETLENS_PIPELINE_HPP_

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetlens/baseline.hpp"
#include "fleetlens/clustering.hpp"
#include "fleetlens/llm_gateway.hpp"
#include "fleetlens/query_planner.hpp"
#include "fleetlens/summary_store.hpp"
#include "fleetlens/validator.hpp"

namespace fleetlens {

struct Answer {
  QueryPlan plan;
  Completion completion;  // the attempt that was kept
  UsageReport usage;      // all attempts
  ValidationReport validation;
  int attempts = 1;

  nlohmann::json to_json() const;
};

// Plans, asks and validates. A response scoring below the retry threshold is
// asked again once with a grounding reminder appended; the better-scoring
// attempt is returned (the first on a tie).
//
// The store is labelled with the model once at construction (refresh() to
// re-read it). All query methods are safe to call concurrently.
class AnalysisEngine {
 public:
  AnalysisEngine(SummaryStore store, BehaviorModel model, LandmarkDirectory landmarks,
                 std::shared_ptr<LlmGateway> gateway,
                 PlannerConfig planner = PlannerConfig::defaults(),
                 ValidatorConfig validator = {});

  // Throws UnknownIntentError, UnknownLandmarkError.
  QueryPlan plan(std::string_view query) const;
  // Throws UnknownEventError.
  QueryPlan plan_event(const StoreKey& event, std::string query = {}) const;

  Answer answer(std::string_view query);
  Answer explain(const StoreKey& event, std::string query = {});
  Answer run(const QueryPlan& plan);

  // Raw-record baseline over the same store.
  StrategyRun run_llm_only(std::string_view query, const LlmOnlyOptions& options = {});

  std::shared_ptr<const std::vector<LabeledWindow>> windows() const;
  void refresh();

  const SummaryStore& store() const noexcept { return store_; }
  const BehaviorModel& model() const noexcept { return model_; }
  const LandmarkDirectory& landmarks() const noexcept { return landmarks_; }
  const PlannerConfig& planner_config() const noexcept { return planner_; }
  const ValidatorConfig& validator_config() const noexcept { return validator_; }
  LlmGateway& gateway() noexcept { return *gateway_; }

 private:
  SummaryStore store_;
  BehaviorModel model_;
  LandmarkDirectory landmarks_;
  std::shared_ptr<LlmGateway> gateway_;
  PlannerConfig planner_;
  ValidatorConfig validator_;
  mutable std::mutex mu_;
  std::shared_ptr<const std::vector<LabeledWindow>> windows_;
};

}  // namespace fleetlens

#endif  // FLEETLENS_PIPELINE_HPP_
