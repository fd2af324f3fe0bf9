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

#ifndef FLEETLENS_VALIDATOR_HPP_
#define FLEETLENS_VALIDATOR_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetlens/query_planner.hpp"
#include "fleetlens/telemetry.hpp"

namespace fleetlens {

enum class IssueKind { kFactual, kGeographic, kBehavioral, kGenericAi };
std::string_view to_string(IssueKind k);

struct ValidationIssue {
  IssueKind kind = IssueKind::kFactual;
  std::string detail;
};

enum class Disposition { kPresent, kReview, kRetry };
std::string_view to_string(Disposition d);

// max(0, 100 - 20 * issues)
int confidence_score(std::size_t issues);
// present >= 80, review 60..79, retry below 60
Disposition disposition_for(int score);

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  int score = 100;
  Disposition disposition = Disposition::kPresent;

  std::size_t issue_count() const { return issues.size(); }
  nlohmann::json to_json() const;
};

struct ValidatorConfig {
  double relative_tolerance = 1e-6;
  std::vector<std::string> alarm_words{"dangerous", "alarming", "severe", "emergency"};
  std::vector<std::string> calm_words{"smooth", "gentle", "uneventful"};
  std::vector<std::string> generic_phrases{"as an ai", "i cannot", "i'm sorry"};
  // A single capitalized word followed by one of these reads as a place.
  std::vector<std::string> place_suffixes{"Square", "Crosswalk", "Housing", "Hall", "Street", "Ave"};
  // Capitalized phrases that are not places (behavior labels, headings).
  std::vector<std::string> ignored_phrases{"Very Aggressive", "Slightly Unstable", "Data Summary",
                                           "Observation Window", "Total Events"};
  // Capitalized words dropped from the front of a phrase before lookup
  // ("Near Union Square" -> "Union Square").
  std::vector<std::string> leading_words{"The", "A", "An", "In", "At", "Near", "Around", "By",
                                         "On", "Of", "From", "To", "Between", "And", "Most",
                                         "Outside", "Along", "Past", "Behind"};

  static ValidatorConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Every decimal literal in reading order. Thousands separators ("2,450") are
// removed, "%" and trailing units are ignored, and '-' counts as a sign
// only when it does not follow a letter, digit or another '-'.
std::vector<double> extract_numbers(std::string_view text);

// Capitalized phrases that look like place names, after the leading-word
// trim. Ignored phrases are not returned.
std::vector<std::string> place_candidates(std::string_view text, const ValidatorConfig& config);

// Pure. Numbers are checked against those stated anywhere in the prompt.
ValidationReport validate(std::string_view response, const QueryPlan& plan,
                          const LandmarkDirectory& landmarks,
                          const ValidatorConfig& config = {});

}  // namespace fleetlens

#endif  // FLEETLENS_VALIDATOR_HPP_
