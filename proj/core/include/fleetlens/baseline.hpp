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

#ifndef FLEETLENS_BASELINE_HPP_
#define FLEETLENS_BASELINE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fleetlens/llm_gateway.hpp"
#include "fleetlens/query_planner.hpp"

namespace fleetlens {

struct StrategyRun {
  Completion completion;  // the final answer
  UsageReport usage;      // every call made for it
};

// Answers from the summary-grounded prompt: one model call, or none when
// cached.
StrategyRun run_grounded(const QueryPlan& plan, LlmGateway& gateway);

// Raw-data baseline: shortened JSON records are packed into chunks,
// up to max_chunks of them are sent for extraction and the findings are
// merged by one synthesis call.
struct LlmOnlyOptions {
  std::int64_t chunk_tokens = 3000;
  std::size_t max_chunks = 5;
  GenerationSettings settings = kMacroSettings;
};

struct Chunk {
  std::size_t first_record = 0;  // index into the input records
  std::size_t record_count = 0;
  std::int64_t tokens = 0;
  std::string text;  // records joined by '\n'
};

// Greedy packing in input order. A record larger than the budget gets a
// chunk of its own. The chunks partition the records.
std::vector<Chunk> chunk_records(std::span<const std::string> records,
                                 std::int64_t chunk_tokens = 3000);

// floor(i * n / m) for i < m when n > m, else 0..n-1.
std::vector<std::size_t> sample_chunk_indices(std::size_t n_chunks, std::size_t max_chunks = 5);

std::string extraction_prompt(std::string_view query, const Chunk& chunk);
std::string synthesis_prompt(std::string_view query, std::span<const std::string> findings);

// A backend failure part-way through a multi-call run. usage() covers the
// calls that completed.
class PartialRunError : public BackendError {
 public:
  PartialRunError(const BackendError& cause, UsageReport usage)
      : BackendError(cause), usage_(std::move(usage)) {}
  const UsageReport& usage() const noexcept { return usage_; }

 private:
  UsageReport usage_;
};

// Throws InsufficientDataError for an empty dataset and PartialRunError when
// a call fails.
StrategyRun run_llm_only(std::string_view query, std::span<const std::string> records,
                         LlmGateway& gateway, const LlmOnlyOptions& options = {});
// Splits JSONL text into records (blank lines skipped) and shortens keys.
std::vector<std::string> jsonl_records(std::string_view jsonl);

}  // namespace fleetlens

#endif  // FLEETLENS_BASELINE_HPP_
