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

#include "fleetlens/baseline.hpp"

#include <fmt/format.h>

#include "fleetlens/codec.hpp"

namespace fleetlens {

StrategyRun run_grounded(const QueryPlan& plan, LlmGateway& gateway) {
  StrategyRun run;
  run.usage.strategy = Strategy::kGrounded;
  run.completion = gateway.complete(plan.prompt_text, plan.temperature, plan.max_tokens);
  run.usage.add(run.completion, plan.temperature, plan.max_tokens);
  return run;
}

std::vector<Chunk> chunk_records(std::span<const std::string> records,
                                 std::int64_t chunk_tokens) {
  if (chunk_tokens <= 0) throw ConfigurationError("chunk size must be positive");
  std::vector<Chunk> chunks;
  Chunk current;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::int64_t t = reference_tokenize(records[i]);
    if (current.record_count > 0 && current.tokens + t > chunk_tokens) {
      chunks.push_back(std::move(current));
      current = Chunk{};
    }
    if (current.record_count == 0) {
      current.first_record = i;
    } else {
      current.text += '\n';
    }
    current.text += records[i];
    current.tokens += t;
    ++current.record_count;
  }
  if (current.record_count > 0) chunks.push_back(std::move(current));
  return chunks;
}

std::vector<std::size_t> sample_chunk_indices(std::size_t n_chunks, std::size_t max_chunks) {
  std::vector<std::size_t> out;
  if (n_chunks <= max_chunks) {
    for (std::size_t i = 0; i < n_chunks; ++i) out.push_back(i);
    return out;
  }
  for (std::size_t i = 0; i < max_chunks; ++i) out.push_back(i * n_chunks / max_chunks);
  return out;
}

std::string extraction_prompt(std::string_view query, const Chunk& chunk) {
  return fmt::format(
      "You are reviewing raw driving-behavior records from a campus shuttle fleet. Each line "
      "is one time window: vid vehicle, ws window start (ms), wd duration (s), mm mean "
      "acceleration magnitude, mv magnitude variance, px/py/pz axis percentiles "
      "(p50 p90 p95 p99), lat/lon position, gq GPS quality, n sample count.\n"
      "### Question\n{}\n"
      "### Data records\n{}\n"
      "### Task\nList the observations in these records that bear on the question.\n",
      query, chunk.text);
}

std::string synthesis_prompt(std::string_view query, std::span<const std::string> findings) {
  std::string joined;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    joined += fmt::format("Findings from part {}:\n{}\n", i + 1, findings[i]);
  }
  return fmt::format(
      "Several partial analyses of shuttle telemetry are given below.\n"
      "### Question\n{}\n"
      "### Data findings\n{}"
      "### Task\nCombine the findings into one coherent answer to the question.\n",
      query, joined);
}

StrategyRun run_llm_only(std::string_view query, std::span<const std::string> records,
                         LlmGateway& gateway, const LlmOnlyOptions& options) {
  if (records.empty()) throw InsufficientDataError("dataset is empty");
  const auto chunks = chunk_records(records, options.chunk_tokens);
  const auto picked = sample_chunk_indices(chunks.size(), options.max_chunks);
  const auto& s = options.settings;

  StrategyRun run;
  run.usage.strategy = Strategy::kLlmOnly;
  std::vector<std::string> findings;
  try {
    for (std::size_t idx : picked) {
      Completion c = gateway.complete(extraction_prompt(query, chunks[idx]), s.temperature,
                                      s.max_tokens);
      run.usage.add(c, s.temperature, s.max_tokens);
      findings.push_back(std::move(c.text));
    }
    run.completion =
        gateway.complete(synthesis_prompt(query, findings), s.temperature, s.max_tokens);
  } catch (const BackendError& e) {
    throw PartialRunError(e, run.usage);
  }
  run.usage.add(run.completion, s.temperature, s.max_tokens);
  return run;
}

std::vector<std::string> jsonl_records(std::string_view jsonl) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      out.push_back(shorten_keys(line));
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace fleetlens
