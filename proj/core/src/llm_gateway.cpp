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

#include "fleetlens/llm_gateway.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace fleetlens {

std::int64_t reference_tokenize(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

bool BackendError::retryable() const noexcept {
  switch (kind_) {
    case Kind::kTimeout:
    case Kind::kTransport:
    case Kind::kRateLimited:
      return true;
    case Kind::kHttp:
      return status_ >= 500;
    case Kind::kProtocol:
      return false;
  }
  return false;
}

std::string_view to_string(BackendError::Kind kind) {
  switch (kind) {
    case BackendError::Kind::kTimeout: return "timeout";
    case BackendError::Kind::kTransport: return "transport";
    case BackendError::Kind::kHttp: return "http";
    case BackendError::Kind::kRateLimited: return "rate_limited";
    case BackendError::Kind::kProtocol: return "protocol";
  }
  return "unknown";
}

double cost_usd(std::int64_t input_tokens, std::int64_t output_tokens) {
  return static_cast<double>(input_tokens) * kInputUsdPerMillionTokens / 1e6 +
         static_cast<double>(output_tokens) * kOutputUsdPerMillionTokens / 1e6;
}

std::string_view to_string(Strategy s) {
  return s == Strategy::kGrounded ? "grounded" : "llm_only";
}

void UsageReport::add(const Completion& c, double temp, int max_tok) {
  input_tokens += c.input_tokens;
  output_tokens += c.output_tokens;
  api_calls += c.api_calls;
  if (c.cached) ++cache_hits;
  retries += c.retries;
  wall_latency_ms += c.wall_latency_ms;
  throttle_ms += c.throttle_ms;
  cost_usd = fleetlens::cost_usd(input_tokens, output_tokens);
  temperature = temp;
  max_tokens = max_tok;
}

nlohmann::json UsageReport::to_json() const {
  return {{"strategy", std::string(to_string(strategy))},
          {"input_tokens", input_tokens},
          {"output_tokens", output_tokens},
          {"total_tokens", total_tokens()},
          {"api_calls", api_calls},
          {"cache_hits", cache_hits},
          {"retries", retries},
          {"wall_latency_ms", wall_latency_ms},
          {"throttle_ms", throttle_ms},
          {"cost_usd", cost_usd},
          {"temperature", temperature},
          {"max_tokens", max_tokens}};
}

CompletionCache::CompletionCache(std::size_t capacity, HashFn hash_fn)
    : capacity_(capacity), hash_fn_(hash_fn) {
  if (capacity_ == 0) throw ConfigurationError("cache capacity must be positive");
}

std::string CompletionCache::canonical(const ChatRequest& r) {
  // {} prints the shortest round-trip form, so distinct doubles stay distinct.
  return fmt::format("temperature={}\nmax_tokens={}\n{}", r.temperature, r.max_tokens, r.prompt);
}

std::uint64_t CompletionCache::hash(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::optional<Completion> CompletionCache::get(const ChatRequest& request) {
  const std::string key = canonical(request);
  const std::uint64_t h = hash_fn_(key);
  std::lock_guard lock(mu_);
  auto [lo, hi] = index_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    if (it->second->canonical == key) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++hits_;
      return it->second->completion;
    }
  }
  ++misses_;
  return std::nullopt;
}

void CompletionCache::put(const ChatRequest& request, const Completion& completion) {
  std::string key = canonical(request);
  const std::uint64_t h = hash_fn_(key);
  std::lock_guard lock(mu_);
  auto [lo, hi] = index_.equal_range(h);
  for (auto it = lo; it != hi; ++it) {
    if (it->second->canonical == key) {
      it->second->completion = completion;
      lru_.splice(lru_.begin(), lru_, it->second);
      return;
    }
  }
  lru_.push_front(Entry{std::move(key), h, completion});
  index_.emplace(h, lru_.begin());
  while (lru_.size() > capacity_) {
    auto victim = std::prev(lru_.end());
    auto [vlo, vhi] = index_.equal_range(victim->hash);
    for (auto it = vlo; it != vhi; ++it) {
      if (it->second == victim) {
        index_.erase(it);
        break;
      }
    }
    lru_.erase(victim);
  }
}

std::size_t CompletionCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

std::uint64_t CompletionCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t CompletionCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

LlmGateway::LlmGateway(std::shared_ptr<LlmBackend> backend, RetryPolicy retry,
                       std::size_t cache_capacity)
    : backend_(std::move(backend)), retry_(retry), cache_(cache_capacity) {
  if (!backend_) throw ConfigurationError("gateway needs a backend");
}

Completion LlmGateway::complete(std::string_view prompt, double temperature, int max_tokens) {
  if (prompt.empty()) throw std::invalid_argument("prompt must not be empty");
  if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");

  const ChatRequest request{std::string(prompt), temperature, max_tokens};
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };

  if (auto hit = cache_.get(request)) {
    Completion c = std::move(*hit);
    c.api_calls = 0;
    c.retries = 0;
    c.throttle_ms = 0.0;
    c.cached = true;
    c.wall_latency_ms = elapsed_ms();
    return c;
  }

  int attempt = 0;
  double waited_ms = 0.0;
  for (;;) {
    try {
      BackendResponse r = backend_->generate(request);
      Completion c;
      c.text = std::move(r.text);
      c.input_tokens = std::max<std::int64_t>(0, r.input_tokens);
      c.output_tokens = std::max<std::int64_t>(0, r.output_tokens);
      c.api_calls = 1;
      c.retries = attempt;
      c.throttle_ms = r.throttle_ms;
      // Backoff sleeps are not model latency.
      c.wall_latency_ms = elapsed_ms() - waited_ms;
      cache_.put(request, c);
      return c;
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= retry_.max_retries) throw;
      std::chrono::duration<double, std::milli> wait =
          retry_.base_backoff * (1 << attempt);
      if (e.kind() == BackendError::Kind::kRateLimited && e.retry_after_s()) {
        wait = std::min<std::chrono::duration<double, std::milli>>(
            std::chrono::duration<double>(*e.retry_after_s()), retry_.max_retry_after);
      }
      if (wait.count() > 0) std::this_thread::sleep_for(wait);
      waited_ms += wait.count();
      ++attempt;
    }
  }
}

}  // namespace fleetlens
