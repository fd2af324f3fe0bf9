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

#ifndef FLEETLENS_LLM_GATEWAY_HPP_
#define FLEETLENS_LLM_GATEWAY_HPP_

#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetlens/errors.hpp"

namespace fleetlens {

// ceil(len(text) / 4): the four-characters-per-token approximation used for
// planning estimates and by the mock backend.
std::int64_t reference_tokenize(std::string_view text);

struct ChatRequest {
  std::string prompt;
  double temperature = 0.7;
  int max_tokens = 500;
};

struct BackendResponse {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  // Time a rate limiter would have made the caller wait. Reported apart from
  // latency.
  double throttle_ms = 0.0;
};

class BackendError : public Error {
 public:
  enum class Kind { kTimeout, kTransport, kHttp, kRateLimited, kProtocol };

  BackendError(Kind kind, const std::string& what, int status = 0,
               std::optional<double> retry_after_s = std::nullopt)
      : Error(what), kind_(kind), status_(status), retry_after_s_(retry_after_s) {}

  Kind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }
  std::optional<double> retry_after_s() const noexcept { return retry_after_s_; }
  // Timeouts, transport failures, 5xx and rate limits are worth retrying.
  bool retryable() const noexcept;

 private:
  Kind kind_;
  int status_;
  std::optional<double> retry_after_s_;
};

std::string_view to_string(BackendError::Kind kind);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  // Must be safe to call concurrently.
  virtual BackendResponse generate(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct Completion {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double wall_latency_ms = 0.0;
  int api_calls = 0;  // 0 on a cache hit
  int retries = 0;
  double throttle_ms = 0.0;
  bool cached = false;
};

inline constexpr double kInputUsdPerMillionTokens = 0.05;
inline constexpr double kOutputUsdPerMillionTokens = 0.08;

double cost_usd(std::int64_t input_tokens, std::int64_t output_tokens);

enum class Strategy { kGrounded, kLlmOnly };
std::string_view to_string(Strategy s);

struct UsageReport {
  Strategy strategy = Strategy::kGrounded;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  int api_calls = 0;
  int cache_hits = 0;
  int retries = 0;
  double wall_latency_ms = 0.0;
  double throttle_ms = 0.0;
  double cost_usd = 0.0;
  // Generation settings of the final call.
  double temperature = 0.0;
  int max_tokens = 0;

  std::int64_t total_tokens() const { return input_tokens + output_tokens; }
  // Accumulates one call and recomputes cost from the token totals.
  void add(const Completion& c, double temperature, int max_tokens);
  nlohmann::json to_json() const;
};

// LRU map from the canonical request string to its completion. The 64-bit
// hash picks the bucket; the full canonical string is compared on lookup, so
// a hash collision can never return another request's completion.
class CompletionCache {
 public:
  using HashFn = std::uint64_t (*)(std::string_view);

  // hash_fn is replaceable so tests can force collisions.
  explicit CompletionCache(std::size_t capacity = 1024, HashFn hash_fn = &CompletionCache::hash);

  static std::string canonical(const ChatRequest& request);
  // FNV-1a, stable across platforms and runs.
  static std::uint64_t hash(std::string_view canonical);

  std::optional<Completion> get(const ChatRequest& request);
  void put(const ChatRequest& request, const Completion& completion);

  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t hits() const;
  std::uint64_t misses() const;

 private:
  struct Entry {
    std::string canonical;
    std::uint64_t hash;
    Completion completion;
  };

  mutable std::mutex mu_;
  std::size_t capacity_;
  HashFn hash_fn_;
  std::list<Entry> lru_;  // front = most recent
  std::unordered_multimap<std::uint64_t, std::list<Entry>::iterator> index_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_backoff{250};
  std::chrono::milliseconds max_retry_after{30'000};
};

// Cache-first completion with retries. Safe for concurrent use.
class LlmGateway {
 public:
  explicit LlmGateway(std::shared_ptr<LlmBackend> backend, RetryPolicy retry = {},
                      std::size_t cache_capacity = 1024);

  // Throws std::invalid_argument for an empty prompt or max_tokens <= 0, and
  // BackendError once retries are exhausted.
  Completion complete(std::string_view prompt, double temperature, int max_tokens);

  CompletionCache& cache() noexcept { return cache_; }
  LlmBackend& backend() noexcept { return *backend_; }

 private:
  std::shared_ptr<LlmBackend> backend_;
  RetryPolicy retry_;
  CompletionCache cache_;
};

// Deterministic stand-in for a chat model. It restates the lines of the
// prompt's data section (the "### Data..." block), so every number and name
// in its answer comes from the prompt. The corrupting mode perturbs one
// number and mentions a place that is not in the prompt.
struct MockOptions {
  enum class Mode { kHonest, kCorrupting };
  Mode mode = Mode::kHonest;
  std::uint64_t seed = 7;
  // Simulated provider limits; the computed waits are reported as
  // throttle_ms, never slept.
  bool simulate_rate_limit = false;
  int requests_per_minute = 30;
  std::int64_t tokens_per_minute = 6000;
};

class MockBackend final : public LlmBackend {
 public:
  explicit MockBackend(MockOptions options = {});

  BackendResponse generate(const ChatRequest& request) override;
  std::string name() const override;

  // The text generate() would return, without rate-limit bookkeeping.
  std::string respond(const ChatRequest& request) const;
  std::uint64_t calls() const;

 private:
  double throttle(std::int64_t tokens);

  MockOptions options_;
  mutable std::mutex mu_;
  std::uint64_t calls_ = 0;
  double clock_ms_ = 0.0;
  std::list<std::pair<double, std::int64_t>> window_;  // (time, tokens) of the last minute
};

// OpenAI-style chat-completions client. Token counts come from the
// response's usage block.
struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{30};
};

class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  BackendResponse generate(const ChatRequest& request) override;
  std::string name() const override;

  static nlohmann::json request_body(const HttpBackendConfig& config, const ChatRequest& request);
  // Throws BackendError(kProtocol) when choices/usage are missing.
  static BackendResponse parse_response(std::string_view body);

 private:
  HttpBackendConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

// {"kind": "mock"|"http", "mode": "honest"|"corrupting", "seed": 7,
//  "simulate_rate_limit": false, "endpoint": ..., "model": ...,
//  "api_key_env": "FLEETLENS_API_KEY"}
std::shared_ptr<LlmBackend> make_backend(const nlohmann::json& config);

}  // namespace fleetlens

#endif  // FLEETLENS_LLM_GATEWAY_HPP_
