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

#ifndef FLEETLENS_TOOLS_COMMANDS_HPP_
#define FLEETLENS_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fleetlens::cli {

struct SimulateArgs {
  std::string kind;  // telemetry | summaries | landmarks
  std::string out;
  double minutes = 134.0;
  int vehicles = 1;
  std::uint64_t seed = 42;
};

struct AggregateArgs {
  std::string input;
  std::string out;
  std::string report;
  std::string profile;
};

struct FilterArgs {
  std::string from;
  std::string to;
  std::string near;
  std::string label;
  std::string min_gps;
};

struct StoreArgs {
  std::string root;
  std::string input;
  FilterArgs filter;
  std::string model;
};

struct ClusterArgs {
  std::string root;
  int k = 5;
  std::uint64_t seed = 42;
  int restarts = 10;
  std::string out;
  int k_min = 1;
  int k_max = 10;
};

// Shared by query, bench and serve.
struct EngineArgs {
  std::string root;
  std::string model;
  std::string landmarks;
  std::string planner;
  std::string validator;
  std::string backend;
  std::optional<std::uint64_t> seed;
};

struct QueryArgs {
  EngineArgs engine;
  std::string text;
  std::string event;  // vehicle@window_start
  int min_score = 0;
};

struct BenchArgs {
  EngineArgs engine;
  std::string queries;
  std::string strategy = "both";
  std::string out;
};

struct ServeArgs {
  EngineArgs engine;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

int run_simulate(const SimulateArgs& a);
int run_aggregate(const AggregateArgs& a);
int run_store_ingest(const StoreArgs& a);
int run_store_scan(const StoreArgs& a);
int run_cluster_fit(const ClusterArgs& a);
int run_cluster_elbow(const ClusterArgs& a);
int run_query(const QueryArgs& a);
int run_bench(const BenchArgs& a);
int run_serve(const ServeArgs& a);

}  // namespace fleetlens::cli

#endif  // FLEETLENS_TOOLS_COMMANDS_HPP_
