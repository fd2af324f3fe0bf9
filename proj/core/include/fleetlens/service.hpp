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

#ifndef FLEETLENS_SERVICE_HPP_
#define FLEETLENS_SERVICE_HPP_

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fleetlens/pipeline.hpp"

namespace fleetlens {

struct HttpResult {
  int status = 200;
  nlohmann::json body;
};

using QueryParams = std::multimap<std::string, std::string>;

// Builds a filter from ?from=&to=&near=lat,lon,radius_m&label=&min_gps=.
// Times are epoch ms or ISO-8601 UTC. Throws InvalidFilterError.
QueryFilter parse_event_filter(const QueryParams& params);

// JSON API over an AnalysisEngine:
//   GET  /health
//   GET  /events     labelled windows matching the filter
//   GET  /clusters   centroids, label counts, model version
//   POST /query      {"text": ...}
//   POST /micro      {"vehicle_id": ..., "window_start": ..., "text"?: ...}
// Errors are {"error": ...}: 400 bad input, 404 unknown event, 422 unknown
// intent or landmark, 502 backend failure.
class ApiService {
 public:
  explicit ApiService(std::shared_ptr<AnalysisEngine> engine, std::string static_dir = {});
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  // Transport-free handlers.
  HttpResult events(const QueryParams& params) const;
  HttpResult clusters() const;
  HttpResult query(std::string_view body);
  HttpResult micro(std::string_view body);

  // Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Serves until stop(). Call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::shared_ptr<AnalysisEngine> engine_;
  std::unique_ptr<Impl> impl_;
};

nlohmann::json api_event(const LabeledWindow& w, int model_version);

}  // namespace fleetlens

#endif  // FLEETLENS_SERVICE_HPP_
