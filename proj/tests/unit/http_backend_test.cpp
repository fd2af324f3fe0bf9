// Copyright 2026 The FleetLens Authors
// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fleetlens/llm_gateway.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

// Local chat-completions stand-in. Replies are chosen per request count.
class FakeProvider {
 public:
  explicit FakeProvider(std::function<void(int, const httplib::Request&, httplib::Response&)> handler)
      : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      handler_(++requests_, req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  int requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::function<void(int, const httplib::Request&, httplib::Response&)> handler_;
  std::atomic<int> requests_{0};
  int port_ = 0;
  std::thread thread_;
};

std::string reply(const std::string& text, int in, int out) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
              {"usage", {{"prompt_tokens", in}, {"completion_tokens", out}}}}
      .dump();
}

HttpBackendConfig config_for(const FakeProvider& p) {
  HttpBackendConfig c;
  c.endpoint = p.endpoint();
  c.model = "test-model";
  c.api_key = "sk-test";
  c.timeout = std::chrono::seconds(2);
  return c;
}

TEST(HttpBackend, SendsChatRequestAndReadsUsage) {
  json seen;
  std::string auth;
  FakeProvider p([&](int, const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(reply("hello", 321, 12), "application/json");
  });
  HttpBackend backend(config_for(p));
  const auto r = backend.generate({"What now?", 0.5, 150});
  EXPECT_EQ(r.text, "hello");
  EXPECT_EQ(r.input_tokens, 321);
  EXPECT_EQ(r.output_tokens, 12);
  EXPECT_EQ(seen.at("model"), "test-model");
  EXPECT_EQ(seen.at("messages").at(0).at("content"), "What now?");
  EXPECT_EQ(seen.at("temperature"), 0.5);
  EXPECT_EQ(seen.at("max_tokens"), 150);
  EXPECT_EQ(auth, "Bearer sk-test");
  EXPECT_EQ(backend.name(), "http:test-model");
}

TEST(HttpBackend, GatewayRetriesServerErrors) {
  FakeProvider p([](int n, const httplib::Request&, httplib::Response& res) {
    if (n < 3) {
      res.status = 503;
      return;
    }
    res.set_content(reply("ok", 10, 2), "application/json");
  });
  LlmGateway gw(std::make_shared<HttpBackend>(config_for(p)),
                {2, std::chrono::milliseconds(1), std::chrono::milliseconds(100)});
  const auto c = gw.complete("x", 0.7, 10);
  EXPECT_EQ(c.retries, 2);
  EXPECT_EQ(c.input_tokens, 10);
  EXPECT_EQ(p.requests(), 3);
}

TEST(HttpBackend, RateLimitCarriesRetryAfter) {
  FakeProvider p([](int n, const httplib::Request&, httplib::Response& res) {
    if (n == 1) {
      res.status = 429;
      res.set_header("Retry-After", "0.05");
      return;
    }
    res.set_content(reply("ok", 10, 2), "application/json");
  });
  HttpBackend backend(config_for(p));
  try {
    backend.generate({"x", 0.7, 10});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kRateLimited);
    EXPECT_EQ(e.status(), 429);
    ASSERT_TRUE(e.retry_after_s().has_value());
    EXPECT_DOUBLE_EQ(*e.retry_after_s(), 0.05);
  }
  EXPECT_EQ(backend.generate({"x", 0.7, 10}).text, "ok");
}

TEST(HttpBackend, ClientErrorAndMalformedBodies) {
  FakeProvider p([](int n, const httplib::Request&, httplib::Response& res) {
    if (n == 1) {
      res.status = 401;
    } else if (n == 2) {
      res.set_content("not json", "text/plain");
    } else {
      res.set_content(R"({"choices":[]})", "application/json");
    }
  });
  LlmGateway gw(std::make_shared<HttpBackend>(config_for(p)),
                {2, std::chrono::milliseconds(1), std::chrono::milliseconds(100)});
  try {
    gw.complete("a", 0.7, 10);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendError::Kind::kHttp);
    EXPECT_EQ(e.status(), 401);
  }
  EXPECT_EQ(p.requests(), 1);
  for (auto prompt : {"b", "c"}) {
    try {
      gw.complete(prompt, 0.7, 10);
      FAIL();
    } catch (const BackendError& e) {
      EXPECT_EQ(e.kind(), BackendError::Kind::kProtocol);
    }
  }
}

TEST(HttpBackend, UnreachableEndpointIsTransportFailure) {
  int port = 0;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  HttpBackendConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  c.model = "m";
  c.timeout = std::chrono::seconds(1);
  HttpBackend backend(c);
  try {
    backend.generate({"x", 0.7, 10});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

TEST(HttpBackend, ConfigValidation) {
  EXPECT_THROW(HttpBackend({"ftp://x", "m", "", std::chrono::seconds(1)}), ConfigurationError);
  EXPECT_THROW(HttpBackend({"http://x", "", "", std::chrono::seconds(1)}), ConfigurationError);
  const auto body = HttpBackend::request_body({"http://x", "m", "", std::chrono::seconds(1)}, {"p", 0.7, 500});
  EXPECT_EQ(body.at("stream"), false);
}

}  // namespace
}  // namespace fleetlens
