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

#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "fleetlens/llm_gateway.hpp"

namespace fleetlens {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"((https?://[^/]+)(/.*)?)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw ConfigurationError("endpoint must be an http(s) URL: " + config_.endpoint);
  }
  base_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
  if (config_.model.empty()) throw ConfigurationError("http backend needs a model name");
}

std::string HttpBackend::name() const { return "http:" + config_.model; }

nlohmann::json HttpBackend::request_body(const HttpBackendConfig& config,
                                         const ChatRequest& request) {
  return {{"model", config.model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens},
          {"stream", false}};
}

BackendResponse HttpBackend::parse_response(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(BackendError::Kind::kProtocol, std::string("malformed response: ") + e.what());
  }
  try {
    BackendResponse r;
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    const auto& usage = j.at("usage");
    r.input_tokens = usage.at("prompt_tokens").get<std::int64_t>();
    r.output_tokens = usage.at("completion_tokens").get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendError::Kind::kProtocol,
                       std::string("response lacks choices or usage: ") + e.what());
  }
}

BackendResponse HttpBackend::generate(const ChatRequest& request) {
  httplib::Client client(base_);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  auto res = client.Post(path_, headers, request_body(config_, request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                       err == httplib::Error::ConnectionTimeout)
                          ? BackendError::Kind::kTimeout
                          : BackendError::Kind::kTransport;
    throw BackendError(kind, "request to " + base_ + " failed: " + httplib::to_string(err));
  }
  if (res->status == 429) {
    std::optional<double> retry_after;
    if (res->has_header("Retry-After")) {
      char* end = nullptr;
      const std::string v = res->get_header_value("Retry-After");
      const double s = std::strtod(v.c_str(), &end);
      if (end != v.c_str()) retry_after = s;
    }
    throw BackendError(BackendError::Kind::kRateLimited, "rate limited by backend", 429,
                       retry_after);
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(BackendError::Kind::kHttp,
                       "backend returned HTTP " + std::to_string(res->status), res->status);
  }
  return parse_response(res->body);
}

std::shared_ptr<LlmBackend> make_backend(const nlohmann::json& config) {
  const std::string kind = config.value("kind", "mock");
  if (kind == "mock") {
    MockOptions o;
    const std::string mode = config.value("mode", "honest");
    if (mode == "honest") {
      o.mode = MockOptions::Mode::kHonest;
    } else if (mode == "corrupting") {
      o.mode = MockOptions::Mode::kCorrupting;
    } else {
      throw ConfigurationError("unknown mock mode: " + mode);
    }
    o.seed = config.value("seed", o.seed);
    o.simulate_rate_limit = config.value("simulate_rate_limit", false);
    o.requests_per_minute = config.value("requests_per_minute", o.requests_per_minute);
    o.tokens_per_minute = config.value("tokens_per_minute", o.tokens_per_minute);
    return std::make_shared<MockBackend>(o);
  }
  if (kind == "http") {
    HttpBackendConfig c;
    c.endpoint = config.value("endpoint", "");
    c.model = config.value("model", "");
    c.timeout = std::chrono::seconds(config.value("timeout_s", 30));
    const std::string key_env = config.value("api_key_env", "FLEETLENS_API_KEY");
    if (const char* key = std::getenv(key_env.c_str())) c.api_key = key;
    return std::make_shared<HttpBackend>(std::move(c));
  }
  throw ConfigurationError("unknown backend kind: " + kind);
}

}  // namespace fleetlens
