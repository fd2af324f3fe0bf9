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

#include "fleetlens/service.hpp"

#include <atomic>
#include <cstdlib>
#include <map>
#include <set>

#include <httplib.h>

#include "fleetlens/geo.hpp"

namespace fleetlens {
namespace {

using nlohmann::json;

HttpResult error(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InvalidFilterError("malformed " + what + ": '" + s + "'");
  }
  return v;
}

const std::string* single(const QueryParams& params, const std::string& name) {
  auto [lo, hi] = params.equal_range(name);
  if (lo == hi) return nullptr;
  if (std::next(lo) != hi) throw InvalidFilterError("parameter given twice: " + name);
  return &lo->second;
}

HttpResult from_exception() {
  try {
    throw;
  } catch (const UnknownIntentError& e) {
    return error(422, e.what(), {{"supported_categories", supported_categories()}});
  } catch (const UnknownLandmarkError& e) {
    return error(422, e.what());
  } catch (const UnknownEventError& e) {
    return error(404, e.what());
  } catch (const BackendError& e) {
    return error(502, e.what(),
                 {{"backend_error", std::string(to_string(e.kind()))}, {"status", e.status()}});
  } catch (const InvalidFilterError& e) {
    return error(400, e.what());
  } catch (const json::exception& e) {
    return error(400, std::string("malformed request body: ") + e.what());
  } catch (const InsufficientDataError& e) {
    return error(422, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

}  // namespace

QueryFilter parse_event_filter(const QueryParams& params) {
  static const std::set<std::string> kKnown = {"from", "to", "near", "label", "min_gps"};
  for (const auto& [k, _] : params) {
    if (!kKnown.count(k)) throw InvalidFilterError("unknown filter parameter: " + k);
  }
  QueryFilter f;
  for (const char* name : {"from", "to"}) {
    if (const auto* v = single(params, name)) {
      auto t = parse_timestamp(*v);
      if (!t) throw InvalidFilterError(std::string("malformed ") + name + ": '" + *v + "'");
      (std::string_view(name) == "from" ? f.from : f.to) = *t;
    }
  }
  if (const auto* v = single(params, "near")) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = v->find(',', pos);
      parts.push_back(v->substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (parts.size() != 3) throw InvalidFilterError("near must be lat,lon,radius_m");
    f.near = GeoCircle{parse_double(parts[0], "latitude"), parse_double(parts[1], "longitude"),
                       parse_double(parts[2], "radius")};
  }
  if (const auto* v = single(params, "label")) f.label = *v;
  if (const auto* v = single(params, "min_gps")) {
    try {
      f.min_gps_quality = parse_gps_quality(*v);
    } catch (const Error&) {
      throw InvalidFilterError("min_gps must be none, fix2d or fix3d");
    }
  }
  f.validate();
  return f;
}

json api_event(const LabeledWindow& w, int model_version) {
  const auto f = extract_features(w.summary);
  return {{"vehicle_id", w.summary.vehicle_id},
          {"window_start", w.summary.window_start},
          {"lat", w.summary.anchor_lat},
          {"lon", w.summary.anchor_lon},
          {"gps_quality", std::string(to_string(w.summary.gps_quality))},
          {"label", w.label},
          {"instability", f.instability},
          {"extreme_event_magnitude", f.extreme_event_magnitude},
          {"model_version", model_version}};
}

struct ApiService::Impl {
  httplib::Server server;
  std::string static_dir;
};

ApiService::ApiService(std::shared_ptr<AnalysisEngine> engine, std::string static_dir)
    : engine_(std::move(engine)), impl_(std::make_unique<Impl>()) {
  if (!engine_) throw ConfigurationError("service needs an engine");
  impl_->static_dir = std::move(static_dir);
  auto& srv = impl_->server;

  auto reply = [](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  srv.Get("/health", [reply](const httplib::Request&, httplib::Response& res) {
    reply(res, {200, {{"status", "ok"}}});
  });
  srv.Get("/events", [this, reply](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    reply(res, events(params));
  });
  srv.Get("/clusters", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, clusters());
  });
  srv.Post("/query", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, query(req.body));
  });
  srv.Post("/micro", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, micro(req.body));
  });
  if (!impl_->static_dir.empty() && !srv.set_mount_point("/", impl_->static_dir)) {
    throw ConfigurationError("static directory not found: " + impl_->static_dir);
  }
}

ApiService::~ApiService() { stop(); }

HttpResult ApiService::events(const QueryParams& params) const {
  try {
    QueryFilter filter = parse_event_filter(params);
    const auto& model = engine_->model();
    if (filter.label && model.index_of(*filter.label) < 0) {
      return error(400, "unknown label: " + *filter.label);
    }
    json out = json::array();
    for (const auto& w : *engine_->windows()) {
      if (filter.matches(w.summary, w.label)) out.push_back(api_event(w, model.version));
    }
    return {200, {{"events", out}, {"count", out.size()}, {"model_version", model.version}}};
  } catch (...) {
    return from_exception();
  }
}

HttpResult ApiService::clusters() const {
  const auto& model = engine_->model();
  std::map<std::string, std::int64_t> counts;
  for (const auto& w : *engine_->windows()) ++counts[w.label];
  json cs = json::array();
  for (std::size_t i = 0; i < model.centroids.size(); ++i) {
    const auto f = model.centroid_features(i);
    const auto& label = model.label_map[i];
    cs.push_back({{"index", i},
                  {"label", label},
                  {"instability", f.instability},
                  {"extreme_event_magnitude", f.extreme_event_magnitude},
                  {"count", counts[label]}});
  }
  return {200,
          {{"model_version", model.version},
           {"k", model.k},
           {"objective", model.objective},
           {"clusters", cs},
           {"total", engine_->windows()->size()}}};
}

HttpResult ApiService::query(std::string_view body) {
  try {
    const json req = json::parse(body);
    if (!req.is_object() || !req.contains("text") || !req["text"].is_string() ||
        req["text"].get<std::string>().empty()) {
      return error(400, "body must be {\"text\": \"<question>\"}");
    }
    return {200, engine_->answer(req["text"].get<std::string>()).to_json()};
  } catch (...) {
    return from_exception();
  }
}

HttpResult ApiService::micro(std::string_view body) {
  try {
    const json req = json::parse(body);
    if (!req.is_object() || !req.contains("vehicle_id") || !req["vehicle_id"].is_string() ||
        !req.contains("window_start") || !req["window_start"].is_number_integer()) {
      return error(400, "body must be {\"vehicle_id\": ..., \"window_start\": <ms>}");
    }
    const StoreKey key{req["vehicle_id"].get<std::string>(),
                       req["window_start"].get<TimestampMs>()};
    return {200, engine_->explain(key, req.value("text", std::string{})).to_json()};
  } catch (...) {
    return from_exception();
  }
}

int ApiService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiService::listen() { return impl_->server.listen_after_bind(); }

void ApiService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace fleetlens
