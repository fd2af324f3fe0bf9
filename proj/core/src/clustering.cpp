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

#include "fleetlens/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "fleetlens/errors.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

constexpr std::size_t kSubsetStartLimit = 256;

std::vector<Point> normalize_all(std::span<const FeatureVector> features, const Normalization& n) {
  std::vector<Point> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(n.apply(f));
  return out;
}

void reseed_empty_clusters(std::span<const Point> points, std::vector<Point>& centroids,
                           std::vector<int>& assignment) {
  const auto k = centroids.size();
  std::vector<std::size_t> counts(k, 0);
  for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] != 0) continue;
    std::size_t worst = points.size();
    double worst_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(assignment[i]);
      if (counts[c] < 2) continue;
      const double d = squared_distance(points[i], centroids[c]);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    if (worst == points.size()) continue;
    --counts[static_cast<std::size_t>(assignment[worst])];
    centroids[j] = points[worst];
    assignment[worst] = static_cast<int>(j);
    counts[j] = 1;
  }
}

void assign_step(std::span<const Point> points, std::vector<Point>& centroids,
                 std::vector<int>& assignment) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    assignment[i] = static_cast<int>(nearest_centroid(centroids, points[i]));
  }
  reseed_empty_clusters(points, centroids, assignment);
}

std::vector<std::size_t> cluster_sizes(std::span<const int> assignment, int k) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

void recompute_means(std::span<const Point> points, std::vector<Point>& centroids,
                     std::span<const int> assignment) {
  std::vector<Point> sums(centroids.size(), Point{0.0, 0.0});
  std::vector<std::size_t> counts(centroids.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    sums[c][0] += points[i][0];
    sums[c][1] += points[i][1];
    ++counts[c];
  }
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    if (counts[j] == 0) continue;
    const auto m = static_cast<double>(counts[j]);
    centroids[j] = {sums[j][0] / m, sums[j][1] / m};
  }
}

// Hartigan-style pass: move a single point to another cluster whenever that
// strictly lowers the objective, updating both means exactly. Lloyd stops at
// configurations where such a move still helps; this does not. A configuration
// stable under these moves is also stable under Lloyd.
void transfer_refine(std::span<const Point> points, std::vector<Point>& centroids,
                     std::vector<int>& assignment, std::vector<double>& trace) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> counts(k, 0);
  for (int a : assignment) ++counts[static_cast<std::size_t>(a)];
  constexpr int kMaxPasses = 1000;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto from = static_cast<std::size_t>(assignment[i]);
      if (counts[from] < 2) continue;
      const double na = static_cast<double>(counts[from]);
      const double gain = na / (na - 1.0) * squared_distance(points[i], centroids[from]);
      std::size_t to = from;
      double best = gain;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == from) continue;
        const double nb = static_cast<double>(counts[j]);
        const double cost = nb / (nb + 1.0) * squared_distance(points[i], centroids[j]);
        if (cost < best) {
          best = cost;
          to = j;
        }
      }
      // Relative margin keeps rounding noise from cycling points back and forth.
      if (to == from || best >= gain * (1.0 - 1e-12)) continue;
      assignment[i] = static_cast<int>(to);
      --counts[from];
      ++counts[to];
      recompute_means(points, centroids, assignment);
      moved = true;
    }
    if (!moved) break;
    trace.push_back(std::min(trace.back(), objective(points, centroids, assignment)));
  }
}

// Calls fn with every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::size_t choose(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (std::size_t{1} << 32)) return r;
  }
  return r;
}

}  // namespace

bool is_aggressive_label(std::string_view label) {
  return label == kAggressive || label == kVeryAggressive;
}

bool is_calm_side_label(std::string_view label) { return label == kCalm || label == kModerate; }

FeatureVector extract_features(const WindowSummary& s) {
  return {std::sqrt(s.x.p99 * s.x.p99 + s.y.p99 * s.y.p99 + s.z.p99 * s.z.p99), s.mag_variance};
}

double squared_distance(const Point& a, const Point& b) {
  const double d0 = a[0] - b[0];
  const double d1 = a[1] - b[1];
  return d0 * d0 + d1 * d1;
}

Normalization Normalization::fit(std::span<const FeatureVector> features) {
  Normalization n;
  if (features.empty()) return n;
  const auto count = static_cast<double>(features.size());
  Point sum{0.0, 0.0};
  for (const auto& f : features) {
    sum[0] += f.extreme_event_magnitude;
    sum[1] += f.instability;
  }
  n.mean = {sum[0] / count, sum[1] / count};
  Point ss{0.0, 0.0};
  for (const auto& f : features) {
    const double d0 = f.extreme_event_magnitude - n.mean[0];
    const double d1 = f.instability - n.mean[1];
    ss[0] += d0 * d0;
    ss[1] += d1 * d1;
  }
  n.stddev = {std::sqrt(ss[0] / count), std::sqrt(ss[1] / count)};
  return n;
}

Point Normalization::apply(const FeatureVector& f) const {
  const double raw[2] = {f.extreme_event_magnitude, f.instability};
  Point p{};
  for (std::size_t d = 0; d < 2; ++d) {
    p[d] = stddev[d] > 0.0 ? (raw[d] - mean[d]) / stddev[d] : 0.0;
  }
  return p;
}

FeatureVector Normalization::invert(const Point& p) const {
  return {mean[0] + p[0] * stddev[0], mean[1] + p[1] * stddev[1]};
}

std::size_t nearest_centroid(std::span<const Point> centroids, const Point& p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_distance(p, centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

double objective(std::span<const Point> points, std::span<const Point> centroids,
                 std::span<const int> assignment) {
  double j = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    j += squared_distance(points[i], centroids[static_cast<std::size_t>(assignment[i])]);
  }
  return j;
}

std::vector<Point> kmeans_plus_plus(std::span<const Point> points, int k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Point> centres;
  std::vector<bool> chosen(n, false);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t first = pick(rng);
  centres.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centres[0]);

  while (centres.size() < static_cast<std::size_t>(k)) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t next = n;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double r = u(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && r < acc) {
          next = i;
          break;
        }
      }
      if (next == n) {  // r landed on the rounding slack at the top
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            next = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a centre; take any unused index.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> u(0, unused.size() - 1);
      next = unused[u(rng)];
    }
    chosen[next] = true;
    centres.push_back(points[next]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centres.back()));
    }
  }
  return centres;
}

KMeansResult lloyd(std::span<const Point> points, std::vector<Point> centroids, int max_iterations,
                   double tolerance) {
  const std::size_t n = points.size();
  const std::size_t k = centroids.size();
  KMeansResult r;
  r.assignment.assign(n, 0);

  for (int it = 0; it < max_iterations; ++it) {
    assign_step(points, centroids, r.assignment);
    r.trace.push_back(objective(points, centroids, r.assignment));

    std::vector<Point> sums(k, Point{0.0, 0.0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(r.assignment[i]);
      sums[c][0] += points[i][0];
      sums[c][1] += points[i][1];
      ++counts[c];
    }
    double movement = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      const auto m = static_cast<double>(counts[j]);
      const Point next{sums[j][0] / m, sums[j][1] / m};
      movement = std::max(movement, std::sqrt(squared_distance(next, centroids[j])));
      centroids[j] = next;
    }
    r.iterations = it + 1;
    if (movement < tolerance) break;
  }
  // Reassign against the final centres, then polish with single-point moves.
  assign_step(points, centroids, r.assignment);
  recompute_means(points, centroids, r.assignment);
  r.trace.push_back(objective(points, centroids, r.assignment));
  transfer_refine(points, centroids, r.assignment, r.trace);
  r.objective = r.trace.back();
  r.centroids = std::move(centroids);
  return r;
}

KMeansResult kmeans(std::span<const Point> points, int k, const FitOptions& options) {
  if (k < 1) throw InsufficientDataError("k must be at least 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw InsufficientDataError(
        fmt::format("k-means needs at least k={} points, got {}", k, points.size()));
  }
  std::mt19937_64 rng(options.seed);
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    auto run = lloyd(points, kmeans_plus_plus(points, k, rng), options.max_iterations,
                     options.tolerance);
    if (!have || run.objective < best.objective) {
      best = std::move(run);
      have = true;
    }
  }
  // Small inputs: also start from every k-subset of the points. Cheap, and
  // it makes small problems land on the global optimum in practice.
  const auto kk = static_cast<std::size_t>(k);
  if (choose(points.size(), kk) <= kSubsetStartLimit) {
    for_each_subset(points.size(), kk, [&](const std::vector<std::size_t>& idx) {
      std::vector<Point> start;
      for (auto i : idx) start.push_back(points[i]);
      auto run = lloyd(points, std::move(start), options.max_iterations, options.tolerance);
      if (run.objective < best.objective) best = std::move(run);
    });
  }
  return best;
}

std::vector<std::string> label_centroids(const std::vector<Point>& centroids) {
  std::vector<std::size_t> order(centroids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = centroids[a];
    const auto& cb = centroids[b];
    if (ca[1] != cb[1]) return ca[1] < cb[1];
    return ca[0] < cb[0];
  });
  std::vector<std::string> labels(centroids.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    labels[order[rank]] = centroids.size() == kBehaviorLabels.size()
                              ? std::string(kBehaviorLabels[rank])
                              : fmt::format("cluster-{}", rank + 1);
  }
  return labels;
}

BehaviorModel fit(std::span<const FeatureVector> features, int k, const FitOptions& options) {
  BehaviorModel m;
  m.normalization = Normalization::fit(features);
  const auto points = normalize_all(features, m.normalization);
  auto result = kmeans(points, k, options);
  m.k = k;
  m.label_map = label_centroids(result.centroids);
  m.cluster_sizes = cluster_sizes(result.assignment, k);
  m.centroids = std::move(result.centroids);
  m.objective = result.objective;
  m.trace = std::move(result.trace);
  m.iterations = result.iterations;
  m.seed = options.seed;
  m.restarts = options.restarts;
  return m;
}

std::size_t BehaviorModel::nearest(const FeatureVector& f) const {
  return nearest_centroid(centroids, normalization.apply(f));
}

const std::string& BehaviorModel::assign(const FeatureVector& f) const {
  return label_map.at(nearest(f));
}

FeatureVector BehaviorModel::centroid_features(std::size_t index) const {
  return normalization.invert(centroids.at(index));
}

int BehaviorModel::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < label_map.size(); ++i) {
    if (label_map[i] == label) return static_cast<int>(i);
  }
  return -1;
}

json BehaviorModel::to_json() const {
  json c = json::array();
  json raw = json::array();
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    c.push_back({centroids[i][0], centroids[i][1]});
    const auto f = centroid_features(i);
    raw.push_back({{"extreme_event_magnitude", f.extreme_event_magnitude},
                   {"instability", f.instability}});
  }
  return {
      {"version", version},
      {"k", k},
      {"features", {"extreme_event_magnitude", "instability"}},
      {"normalization", {{"mean", {normalization.mean[0], normalization.mean[1]}},
                         {"std", {normalization.stddev[0], normalization.stddev[1]}}}},
      {"centroids", c},
      {"centroids_raw", raw},
      {"label_map", label_map},
      {"cluster_sizes", cluster_sizes},
      {"objective", objective},
      {"iterations", iterations},
      {"seed", seed},
      {"restarts", restarts},
  };
}

BehaviorModel BehaviorModel::from_json(const json& j) {
  BehaviorModel m;
  try {
    m.version = j.at("version").get<int>();
    m.k = j.at("k").get<int>();
    const auto& norm = j.at("normalization");
    m.normalization.mean = {norm.at("mean").at(0).get<double>(), norm.at("mean").at(1).get<double>()};
    m.normalization.stddev = {norm.at("std").at(0).get<double>(), norm.at("std").at(1).get<double>()};
    for (const auto& c : j.at("centroids")) {
      m.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    }
    m.label_map = j.at("label_map").get<std::vector<std::string>>();
    if (j.contains("cluster_sizes")) {
      m.cluster_sizes = j.at("cluster_sizes").get<std::vector<std::size_t>>();
    }
    m.objective = j.value("objective", 0.0);
    m.iterations = j.value("iterations", 0);
    m.seed = j.value("seed", std::uint64_t{0});
    m.restarts = j.value("restarts", 0);
  } catch (const json::exception& e) {
    throw ConfigurationError(fmt::format("malformed behavior model: {}", e.what()));
  }
  if (m.k < 1 || m.centroids.size() != static_cast<std::size_t>(m.k) ||
      m.label_map.size() != m.centroids.size()) {
    throw ConfigurationError("behavior model: k, centroids and label_map disagree");
  }
  std::vector<std::string> sorted = m.label_map;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigurationError("behavior model: label_map is not a bijection");
  }
  return m;
}

double silhouette(std::span<const Point> points, std::span<const int> assignment) {
  if (points.size() != assignment.size()) throw MetricError("points and assignments differ in size");
  int k = 0;
  for (int a : assignment) {
    if (a < 0) throw MetricError("negative cluster id");
    k = std::max(k, a + 1);
  }
  if (k < 2) throw MetricError("silhouette needs at least two clusters");
  const auto sizes = cluster_sizes(assignment, k);
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] == 0) throw MetricError(fmt::format("cluster {} is empty", j));
  }

  const std::size_t n = points.size();
  std::vector<double> sums(static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t o = 0; o < n; ++o) {
      if (o == i) continue;
      sums[static_cast<std::size_t>(assignment[o])] += std::sqrt(squared_distance(points[i], points[o]));
    }
    const auto own = static_cast<std::size_t>(assignment[i]);
    if (sizes[own] < 2) continue;  // singleton: s(i) = 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sums.size(); ++j) {
      if (j == own) continue;
      b = std::min(b, sums[j] / static_cast<double>(sizes[j]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double silhouette(std::span<const FeatureVector> features, std::span<const int> assignment) {
  const auto points = normalize_all(features, Normalization::fit(features));
  return silhouette(points, assignment);
}

std::vector<std::pair<int, double>> elbow_curve(std::span<const FeatureVector> features, int k_min,
                                                int k_max, const FitOptions& options) {
  if (k_min < 1 || k_max < k_min) throw InsufficientDataError("invalid k range");
  const auto points = normalize_all(features, Normalization::fit(features));
  std::vector<std::pair<int, double>> curve;
  std::optional<KMeansResult> previous;
  for (int k = k_min; k <= k_max; ++k) {
    auto best = kmeans(points, k, options);
    if (previous) {
      std::size_t worst = 0;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = squared_distance(
            points[i], previous->centroids[static_cast<std::size_t>(previous->assignment[i])]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      auto init = previous->centroids;
      init.push_back(points[worst]);
      auto warm = lloyd(points, std::move(init), options.max_iterations, options.tolerance);
      if (warm.objective < best.objective) best = std::move(warm);
    }
    curve.emplace_back(k, best.objective);
    previous = std::move(best);
  }
  return curve;
}

}  // namespace fleetlens
