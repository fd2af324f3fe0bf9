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

#include "fleetlens/validator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include "fleetlens/clustering.hpp"
#include "fleetlens/errors.hpp"

namespace fleetlens {
namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Lowercase, with the typographic apostrophe folded to '.
std::string fold(std::string_view s) {
  std::string out = lower(s);
  for (std::string::size_type p; (p = out.find("\xE2\x80\x99")) != std::string::npos;) {
    out.replace(p, 3, "'");
  }
  return out;
}

bool contains_word_start(const std::string& haystack, const std::string& word) {
  for (auto p = haystack.find(word); p != std::string::npos; p = haystack.find(word, p + 1)) {
    if (p == 0 || !is_alnum(haystack[p - 1])) return true;
  }
  return false;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = haystack.find(needle); p != std::string::npos;
       p = haystack.find(needle, p + needle.size())) {
    if (p == 0 || !is_alnum(haystack[p - 1])) ++n;
  }
  return n;
}

bool matches_any(double v, const std::vector<double>& pool, double tol) {
  return std::any_of(pool.begin(), pool.end(), [&](double p) {
    if (v == p) return true;
    return std::abs(v - p) <= tol * std::max(std::abs(v), std::abs(p));
  });
}

std::string format_number(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

struct Token {
  std::string text;
  bool joined;  // separated from the previous token by spaces only
};

std::vector<Token> word_tokens(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  bool joined = false;
  auto word_char = [](char c) { return is_alnum(c) || c == '\'' || c == '&' || c == '-'; };
  while (i < text.size()) {
    if (word_char(text[i])) {
      std::size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      out.push_back({std::string(text.substr(i, j - i)), joined});
      joined = true;
      i = j;
    } else {
      if (text[i] != ' ') joined = false;
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(IssueKind k) {
  switch (k) {
    case IssueKind::kFactual: return "factual";
    case IssueKind::kGeographic: return "geographic";
    case IssueKind::kBehavioral: return "behavioral";
    case IssueKind::kGenericAi: return "generic_ai";
  }
  return "unknown";
}

std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::kPresent: return "present";
    case Disposition::kReview: return "review";
    case Disposition::kRetry: return "retry";
  }
  return "unknown";
}

int confidence_score(std::size_t issues) {
  return issues >= 5 ? 0 : 100 - 20 * static_cast<int>(issues);
}

Disposition disposition_for(int score) {
  if (score >= 80) return Disposition::kPresent;
  if (score >= 60) return Disposition::kReview;
  return Disposition::kRetry;
}

nlohmann::json ValidationReport::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& i : issues) {
    arr.push_back({{"kind", std::string(to_string(i.kind))}, {"detail", i.detail}});
  }
  return {{"issues", arr},
          {"issue_count", issue_count()},
          {"score", score},
          {"disposition", std::string(to_string(disposition))}};
}

ValidatorConfig ValidatorConfig::from_json(const nlohmann::json& j) {
  ValidatorConfig c;
  c.relative_tolerance = j.value("relative_tolerance", c.relative_tolerance);
  c.alarm_words = j.value("alarm_words", c.alarm_words);
  c.calm_words = j.value("calm_words", c.calm_words);
  c.generic_phrases = j.value("generic_phrases", c.generic_phrases);
  c.place_suffixes = j.value("place_suffixes", c.place_suffixes);
  c.ignored_phrases = j.value("ignored_phrases", c.ignored_phrases);
  c.leading_words = j.value("leading_words", c.leading_words);
  if (!(c.relative_tolerance >= 0.0)) throw ConfigurationError("relative_tolerance must be >= 0");
  return c;
}

nlohmann::json ValidatorConfig::to_json() const {
  return {{"relative_tolerance", relative_tolerance}, {"alarm_words", alarm_words},
          {"calm_words", calm_words},                 {"generic_phrases", generic_phrases},
          {"place_suffixes", place_suffixes},         {"ignored_phrases", ignored_phrases},
          {"leading_words", leading_words}};
}

std::vector<double> extract_numbers(std::string_view text) {
  std::vector<double> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::size_t j = i;
    while (j < n && is_digit(text[j])) ++j;
    std::string digits(text.substr(i, j - i));
    // Thousands groups only after a lead of one to three digits.
    if (j - i <= 3) {
      while (j + 3 < n && text[j] == ',' && is_digit(text[j + 1]) && is_digit(text[j + 2]) &&
             is_digit(text[j + 3]) && (j + 4 >= n || !is_digit(text[j + 4]))) {
        digits.append(text.substr(j + 1, 3));
        j += 4;
      }
    }
    if (j + 1 < n && text[j] == '.' && is_digit(text[j + 1])) {
      std::size_t k = j + 1;
      while (k < n && is_digit(text[k])) ++k;
      digits.append(text.substr(j, k - j));
      j = k;
    }
    bool negative = start > 0 && text[start - 1] == '-' &&
                    (start == 1 || !(is_alnum(text[start - 2]) || text[start - 2] == '-'));
    double v = std::strtod(digits.c_str(), nullptr);
    out.push_back(negative ? -v : v);
    i = j;
  }
  return out;
}

std::vector<std::string> place_candidates(std::string_view text, const ValidatorConfig& config) {
  std::set<std::string> label_words;
  for (auto label : kBehaviorLabels) {
    for (const auto& t : word_tokens(label)) label_words.insert(t.text);
  }
  std::set<std::string> ignored;
  for (const auto& p : config.ignored_phrases) ignored.insert(lower(p));
  std::set<std::string> suffixes;
  for (const auto& s : config.place_suffixes) suffixes.insert(lower(s));
  const std::set<std::string> leading(config.leading_words.begin(), config.leading_words.end());

  const auto tokens = word_tokens(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_upper(tokens[i].text[0])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j].joined && is_upper(tokens[j].text[0])) ++j;
    std::size_t a = i;
    while (a < j && leading.count(tokens[a].text)) ++a;

    std::vector<std::string> words;
    for (std::size_t k = a; k < j; ++k) words.push_back(tokens[k].text);
    if (words.size() == 1 && j < tokens.size() && tokens[j].joined &&
        suffixes.count(lower(tokens[j].text))) {
      words.push_back(tokens[j].text);
    }
    const bool all_labels = std::all_of(words.begin(), words.end(),
                                        [&](const std::string& w) { return label_words.count(w); });
    if (words.size() >= 2 && !all_labels) {
      std::string phrase = words[0];
      for (std::size_t k = 1; k < words.size(); ++k) phrase += " " + words[k];
      if (!ignored.count(lower(phrase))) out.push_back(std::move(phrase));
    }
    i = j;
  }
  return out;
}

ValidationReport validate(std::string_view response, const QueryPlan& plan,
                          const LandmarkDirectory& landmarks, const ValidatorConfig& config) {
  ValidationReport report;

  const auto allowed = extract_numbers(plan.prompt_text);
  std::set<double> reported;
  for (double v : extract_numbers(response)) {
    if (matches_any(v, allowed, config.relative_tolerance) || !reported.insert(v).second) continue;
    report.issues.push_back({IssueKind::kFactual, "number not in context: " + format_number(v)});
  }

  std::set<std::string> unknown;
  for (const auto& name : place_candidates(response, config)) {
    if (landmarks.contains(name) || !unknown.insert(lower(name)).second) continue;
    report.issues.push_back({IssueKind::kGeographic, "unknown landmark: " + name});
  }

  const std::string folded = fold(response);
  if (plan.intent.is_micro() && plan.context.micro) {
    const std::string& label = plan.context.micro->label;
    const std::vector<std::string>* forbidden = nullptr;
    if (is_calm_side_label(label)) {
      forbidden = &config.alarm_words;
    } else if (is_aggressive_label(label)) {
      forbidden = &config.calm_words;
    }
    if (forbidden) {
      for (const auto& w : *forbidden) {
        if (contains_word_start(folded, lower(w))) {
          report.issues.push_back(
              {IssueKind::kBehavioral, "'" + w + "' contradicts label " + label});
          break;
        }
      }
    }
  }

  for (const auto& phrase : config.generic_phrases) {
    const std::size_t hits = count_occurrences(folded, fold(phrase));
    for (std::size_t k = 0; k < hits; ++k) {
      report.issues.push_back({IssueKind::kGenericAi, "generic phrase: " + phrase});
    }
  }

  report.score = confidence_score(report.issue_count());
  report.disposition = disposition_for(report.score);
  return report;
}

}  // namespace fleetlens
