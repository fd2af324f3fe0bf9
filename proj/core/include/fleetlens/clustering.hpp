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

#ifndef FLEETLENS_CLUSTERING_HPP_
#define FLEETLENS_CLUSTERING_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetlens/telemetry.hpp"

namespace fleetlens {

// Behavior names for k = 5, ordered from smoothest to harshest.
inline constexpr std::array<std::string_view, 5> kBehaviorLabels = {
    "Calm", "Moderate", "Slightly Unstable", "Aggressive", "Very Aggressive"};

inline constexpr std::string_view kCalm = kBehaviorLabels[0];
inline constexpr std::string_view kModerate = kBehaviorLabels[1];
inline constexpr std::string_view kSlightlyUnstable = kBehaviorLabels[2];
inline constexpr std::string_view kAggressive = kBehaviorLabels[3];
inline constexpr std::string_view kVeryAggressive = kBehaviorLabels[4];

bool is_aggressive_label(std::string_view label);
bool is_calm_side_label(std::string_view label);

struct FeatureVector {
  // Norm of the per-axis 99th percentiles, m/s^2.
  double extreme_event_magnitude = 0.0;
  // Variance of the acceleration magnitude, (m/s^2)^2.
  double instability = 0.0;

  bool operator==(const FeatureVector&) const = default;
};

FeatureVector extract_features(const WindowSummary& s);

// A feature vector in z-score space: [0] extreme magnitude, [1] instability.
using Point = std::array<double, 2>;

double squared_distance(const Point& a, const Point& b);

// Per-dimension z-score with population standard deviation. A dimension
// whose deviation is zero maps to 0.
struct Normalization {
  Point mean{0.0, 0.0};
  Point stddev{1.0, 1.0};

  static Normalization fit(std::span<const FeatureVector> features);
  Point apply(const FeatureVector& f) const;
  FeatureVector invert(const Point& p) const;
};

struct FitOptions {
  std::uint64_t seed = 42;
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-6;  // max centroid movement, normalized units
};

// Outcome of one Lloyd run.
struct KMeansResult {
  std::vector<Point> centroids;
  std::vector<int> assignment;
  double objective = 0.0;
  // Objective after every assignment step. Never increases.
  std::vector<double> trace;
  int iterations = 0;
};

// k-means++ seeding: first centre uniform, then proportional to the squared
// distance to the nearest chosen centre.
std::vector<Point> kmeans_plus_plus(std::span<const Point> points, int k, std::mt19937_64& rng);

// Lloyd iterations from the given centres. Empty clusters are re-seeded with
// the point farthest from its centre.
KMeansResult lloyd(std::span<const Point> points, std::vector<Point> centroids, int max_iterations,
                   double tolerance);

// Best (lowest objective) of options.restarts seeded runs. Deterministic for
// a given (points, k, options). Throws InsufficientDataError when
// points.size() < k or k < 1.
KMeansResult kmeans(std::span<const Point> points, int k, const FitOptions& options);

// Sum of squared distances of every point to its assigned centre.
double objective(std::span<const Point> points, std::span<const Point> centroids,
                 std::span<const int> assignment);

// Index of the nearest centre; ties go to the lowest index.
std::size_t nearest_centroid(std::span<const Point> centroids, const Point& p);

struct BehaviorModel {
  int version = 1;
  int k = 0;
  Normalization normalization;
  std::vector<Point> centroids;          // normalized space
  std::vector<std::string> label_map;    // centroid index -> label
  std::vector<std::size_t> cluster_sizes;
  double objective = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  std::uint64_t seed = 0;
  int restarts = 0;

  std::size_t nearest(const FeatureVector& f) const;
  const std::string& assign(const FeatureVector& f) const;
  const std::string& assign(const WindowSummary& s) const { return assign(extract_features(s)); }
  // Centroid in feature units.
  FeatureVector centroid_features(std::size_t index) const;
  // Label map inverted: label -> centroid index, or -1.
  int index_of(std::string_view label) const;

  nlohmann::json to_json() const;
  static BehaviorModel from_json(const nlohmann::json& j);
};

// Orders centroids ascending on (instability, extreme magnitude) and names
// them kBehaviorLabels when k == 5, "cluster-<rank>" otherwise.
std::vector<std::string> label_centroids(const std::vector<Point>& centroids);

// Z-scores the features, runs kmeans() and labels the centroids.
BehaviorModel fit(std::span<const FeatureVector> features, int k, const FitOptions& options = {});

// Mean silhouette in Euclidean space. Singleton clusters score 0. Throws
// MetricError with fewer than two clusters or an empty cluster id.
double silhouette(std::span<const Point> points, std::span<const int> assignment);
// Same, after z-scoring the features.
double silhouette(std::span<const FeatureVector> features, std::span<const int> assignment);

// (k, J) for every k in [k_min, k_max]. Each k also tries the previous k's
// solution plus the worst-fit point as a centre, so J never increases with k.
std::vector<std::pair<int, double>> elbow_curve(std::span<const FeatureVector> features, int k_min,
                                                int k_max, const FitOptions& options = {});

}  // namespace fleetlens

#endif  // FLEETLENS_CLUSTERING_HPP_
