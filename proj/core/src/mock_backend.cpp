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

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "fleetlens/llm_gateway.hpp"
#include "fleetlens/validator.hpp"

namespace fleetlens {
namespace {

constexpr std::array<std::string_view, 3> kOpeners = {
    "Based on the data summary:",
    "According to the supplied records:",
    "From the provided data:",
};

constexpr std::array<std::string_view, 4> kInventedPlaces = {
    "Maple Street", "Harbor Square", "Quarry Hall", "Juniper Crosswalk"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Lines of the first "### Data..." section, minus scope and blank lines.
std::vector<std::string> data_lines(std::string_view prompt) {
  std::vector<std::string> out;
  std::istringstream in{std::string(prompt)};
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (starts_with(line, "### ")) {
      if (inside) break;
      inside = starts_with(line, "### Data");
      continue;
    }
    if (!inside || line.empty() || starts_with(line, "Scope:")) continue;
    if (starts_with(line, "- ")) line.erase(0, 2);
    out.push_back(line);
  }
  return out;
}

std::string compose(std::string_view opener, const std::vector<std::string>& facts,
                    std::int64_t budget) {
  std::string text(opener);
  if (reference_tokenize(text) > budget) {
    text.resize(static_cast<std::size_t>(std::max<std::int64_t>(budget, 0)) * 4);
    return text;
  }
  for (const auto& f : facts) {
    std::string next = text + "\n" + f;
    if (reference_tokenize(next) > budget) break;
    text = std::move(next);
  }
  return text;
}

bool near_any(double v, const std::vector<double>& values) {
  return std::any_of(values.begin(), values.end(), [v](double p) {
    return std::abs(p - v) <= 1e-6 * std::max(std::abs(p), std::abs(v));
  });
}

// Replaces the first free-standing integer with one the prompt never states.
bool perturb_number(std::string& text, const std::vector<double>& allowed) {
  auto punct = [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || std::isalpha(static_cast<unsigned char>(c)) ||
           c == '.' || c == ',' || c == ':' || c == '-';
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    const bool before_ok = i == 0 || !punct(text[i - 1]);
    const bool after_ok = j == text.size() || !punct(text[j]) ||
                          (text[j] == '.' && (j + 1 == text.size() || !std::isdigit(static_cast<unsigned char>(text[j + 1])))) ||
                          (text[j] == ',' && (j + 1 == text.size() || text[j + 1] == ' '));
    if (before_ok && after_ok && j - i <= 9) {
      long long v = std::stoll(text.substr(i, j - i));
      long long w = v + 2;
      while (near_any(static_cast<double>(w), allowed)) ++w;
      text.replace(i, j - i, std::to_string(w));
      return true;
    }
    i = j;
  }
  return false;
}

}  // namespace

MockBackend::MockBackend(MockOptions options) : options_(options) {
  if (options_.requests_per_minute <= 0 || options_.tokens_per_minute <= 0) {
    throw ConfigurationError("rate limits must be positive");
  }
}

std::string MockBackend::name() const {
  return options_.mode == MockOptions::Mode::kHonest ? "mock" : "mock-corrupting";
}

std::string MockBackend::respond(const ChatRequest& request) const {
  const std::string_view opener =
      kOpeners[(CompletionCache::hash(request.prompt) ^ options_.seed) % kOpeners.size()];
  std::vector<std::string> facts = data_lines(request.prompt);
  if (facts.empty()) facts.emplace_back("No data section was provided.");
  const std::int64_t budget = request.max_tokens;

  if (options_.mode == MockOptions::Mode::kHonest) return compose(opener, facts, budget);

  const std::string prompt_lower = lower(request.prompt);
  std::string_view place = kInventedPlaces[0];
  for (auto p : kInventedPlaces) {
    if (prompt_lower.find(lower(p)) == std::string::npos) {
      place = p;
      break;
    }
  }
  const std::vector<double> allowed = extract_numbers(request.prompt);
  std::string tail = fmt::format(" Activity also clusters near {}.", place);
  const std::int64_t reserve = reference_tokenize(tail) + 8;
  std::string text = compose(opener, facts, std::max<std::int64_t>(budget - reserve, 1));
  if (!perturb_number(text, allowed)) {
    long long w = 9973;
    while (near_any(static_cast<double>(w), allowed)) ++w;
    text += fmt::format(" About {} more windows were seen.", w);
  }
  text += tail;
  if (reference_tokenize(text) > budget) text.resize(static_cast<std::size_t>(budget) * 4);
  return text;
}

double MockBackend::throttle(std::int64_t tokens) {
  // Called with mu_ held. Simulated time only moves forward by waits.
  double t = clock_ms_;
  auto prune = [&] {
    while (!window_.empty() && window_.front().first <= t - 60'000.0) window_.pop_front();
  };
  prune();
  for (;;) {
    std::int64_t used = 0;
    for (const auto& [_, n] : window_) used += n;
    const bool requests_ok =
        window_.size() < static_cast<std::size_t>(options_.requests_per_minute);
    const bool tokens_ok = window_.empty() || used + tokens <= options_.tokens_per_minute;
    if (requests_ok && tokens_ok) break;
    t = window_.front().first + 60'000.0;
    prune();
  }
  const double wait = t - clock_ms_;
  window_.emplace_back(t, tokens);
  clock_ms_ = t;
  return wait;
}

BackendResponse MockBackend::generate(const ChatRequest& request) {
  BackendResponse r;
  r.text = respond(request);
  r.input_tokens = reference_tokenize(request.prompt);
  r.output_tokens = reference_tokenize(r.text);
  std::lock_guard lock(mu_);
  ++calls_;
  if (options_.simulate_rate_limit) r.throttle_ms = throttle(r.input_tokens + r.output_tokens);
  return r;
}

std::uint64_t MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace fleetlens
