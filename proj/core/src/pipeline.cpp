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

#include "fleetlens/pipeline.hpp"

#include "fleetlens/codec.hpp"

namespace fleetlens {

nlohmann::json Answer::to_json() const {
  return {{"answer", completion.text},
          {"intent", std::string(to_string(plan.intent.category))},
          {"validation", validation.to_json()},
          {"usage", usage.to_json()},
          {"attempts", attempts},
          {"plan", plan.to_json()}};
}

AnalysisEngine::AnalysisEngine(SummaryStore store, BehaviorModel model,
                               LandmarkDirectory landmarks, std::shared_ptr<LlmGateway> gateway,
                               PlannerConfig planner, ValidatorConfig validator)
    : store_(std::move(store)),
      model_(std::move(model)),
      landmarks_(std::move(landmarks)),
      gateway_(std::move(gateway)),
      planner_(std::move(planner)),
      validator_(std::move(validator)) {
  if (!gateway_) throw ConfigurationError("engine needs a gateway");
  refresh();
}

void AnalysisEngine::refresh() {
  auto fresh = std::make_shared<const std::vector<LabeledWindow>>(label_snapshot(store_, model_));
  std::lock_guard lock(mu_);
  windows_ = std::move(fresh);
}

std::shared_ptr<const std::vector<LabeledWindow>> AnalysisEngine::windows() const {
  std::lock_guard lock(mu_);
  return windows_;
}

QueryPlan AnalysisEngine::plan(std::string_view query) const {
  const Intent intent = classify(query, planner_, &landmarks_);
  const auto w = windows();
  return build_prompt(intent, retrieve(intent, *w, model_, landmarks_, planner_));
}

QueryPlan AnalysisEngine::plan_event(const StoreKey& event, std::string query) const {
  const Intent intent = micro_intent(event, std::move(query));
  const auto w = windows();
  return build_prompt(intent, retrieve(intent, *w, model_, landmarks_, planner_));
}

Answer AnalysisEngine::answer(std::string_view query) { return run(plan(query)); }

Answer AnalysisEngine::explain(const StoreKey& event, std::string query) {
  return run(plan_event(event, std::move(query)));
}

Answer AnalysisEngine::run(const QueryPlan& plan) {
  Answer a;
  a.plan = plan;
  StrategyRun first = run_grounded(plan, *gateway_);
  a.usage = first.usage;
  a.completion = std::move(first.completion);
  a.validation = validate(a.completion.text, plan, landmarks_, validator_);
  if (a.validation.disposition != Disposition::kRetry) return a;

  QueryPlan retry = plan;
  retry.prompt_text += "\n";
  retry.prompt_text += kGroundingReminder;
  retry.prompt_text += "\n";
  Completion second = gateway_->complete(retry.prompt_text, retry.temperature, retry.max_tokens);
  a.usage.add(second, retry.temperature, retry.max_tokens);
  a.attempts = 2;
  ValidationReport second_report = validate(second.text, plan, landmarks_, validator_);
  if (second_report.score > a.validation.score) {
    a.completion = std::move(second);
    a.validation = std::move(second_report);
  }
  return a;
}

StrategyRun AnalysisEngine::run_llm_only(std::string_view query, const LlmOnlyOptions& options) {
  const auto w = windows();
  std::vector<std::string> records;
  records.reserve(w->size());
  for (const auto& lw : *w) records.push_back(encode_summary(lw.summary));
  return fleetlens::run_llm_only(query, records, *gateway_, options);
}

}  // namespace fleetlens
