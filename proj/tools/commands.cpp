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

#include "commands.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fleetlens/baseline.hpp"
#include "fleetlens/clustering.hpp"
#include "fleetlens/codec.hpp"
#include "fleetlens/edge_aggregator.hpp"
#include "fleetlens/errors.hpp"
#include "fleetlens/pipeline.hpp"
#include "fleetlens/service.hpp"
#include "fleetlens/summary_store.hpp"
#include "fleetlens/synthetic.hpp"

namespace fleetlens::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigurationError("cannot write " + path);
  return out;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    open_out(path) << j.dump(2) << "\n";
  }
}

SamplingProfile load_profile(const std::string& path) {
  SamplingProfile p;
  if (path.empty()) return p;
  const json j = json::parse(read_file(path));
  p.frequency_hz = j.value("frequency_hz", p.frequency_hz);
  p.window_seconds = j.value("window_seconds", p.window_seconds);
  p.axes = j.value("axes", p.axes);
  p.bytes_per_reading = j.value("bytes_per_reading", p.bytes_per_reading);
  p.gps_bytes_per_window = j.value("gps_bytes_per_window", p.gps_bytes_per_window);
  p.validate();
  return p;
}

json report_json(const ReductionReport& r) {
  return {{"windows", r.windows},
          {"raw_bytes_projected", r.raw_bytes_projected},
          {"aggregated_bytes", r.aggregated_bytes},
          {"reduction_pct", r.reduction_pct},
          {"max_packet_bytes", r.max_packet_bytes},
          {"mean_packet_bytes", r.mean_packet_bytes},
          {"dropped_out_of_order", r.dropped_out_of_order},
          {"gap_windows", r.gap_windows},
          {"invalid_lines", r.invalid_lines}};
}

QueryFilter make_filter(const FilterArgs& f) {
  QueryParams params;
  if (!f.from.empty()) params.emplace("from", f.from);
  if (!f.to.empty()) params.emplace("to", f.to);
  if (!f.near.empty()) params.emplace("near", f.near);
  if (!f.label.empty()) params.emplace("label", f.label);
  if (!f.min_gps.empty()) params.emplace("min_gps", f.min_gps);
  return parse_event_filter(params);
}

BehaviorModel load_model(const SummaryStore& store, const std::string& path) {
  if (!path.empty()) return BehaviorModel::from_json(json::parse(read_file(path)));
  const auto v = store.latest_model_version();
  if (!v) throw ConfigurationError("store has no model; run `fleetlens cluster fit` first");
  return BehaviorModel::from_json(json::parse(*store.model(*v)));
}

std::shared_ptr<LlmGateway> make_gateway(const EngineArgs& e) {
  json cfg = e.backend.empty() ? json{{"kind", "mock"}} : json::parse(read_file(e.backend));
  if (e.seed && cfg.value("kind", "mock") == "mock") cfg["seed"] = *e.seed;
  return std::make_shared<LlmGateway>(make_backend(cfg));
}

std::shared_ptr<AnalysisEngine> make_engine(const EngineArgs& e,
                                            std::shared_ptr<LlmGateway> gateway = nullptr) {
  SummaryStore store = SummaryStore::open_directory(e.root);
  BehaviorModel model = load_model(store, e.model);
  LandmarkDirectory landmarks =
      e.landmarks.empty() ? campus_landmarks() : LandmarkDirectory::load(e.landmarks);
  PlannerConfig planner = e.planner.empty() ? PlannerConfig::defaults() : PlannerConfig::load(e.planner);
  ValidatorConfig validator = e.validator.empty()
                                  ? ValidatorConfig{}
                                  : ValidatorConfig::from_json(json::parse(read_file(e.validator)));
  if (!gateway) gateway = make_gateway(e);
  return std::make_shared<AnalysisEngine>(std::move(store), std::move(model), std::move(landmarks),
                                          std::move(gateway), std::move(planner),
                                          std::move(validator));
}

StoreKey parse_event(const std::string& text) {
  const auto at = text.rfind('@');
  auto ws = at == std::string::npos ? std::nullopt : parse_timestamp(text.substr(at + 1));
  if (at == 0 || !ws) throw InvalidFilterError("event must be vehicle@window_start");
  return {text.substr(0, at), *ws};
}

}  // namespace

int run_simulate(const SimulateArgs& a) {
  const auto landmarks = campus_landmarks();
  if (a.kind == "landmarks") {
    open_out(a.out) << landmarks.to_json_text() << "\n";
    return 0;
  }
  if (a.kind == "summaries") {
    ShapedDatasetOptions o;
    o.seed = a.seed;
    o.vehicles.clear();
    for (int v = 0; v < std::max(a.vehicles, 1); ++v) o.vehicles.push_back(fmt::format("bus-{:02d}", v + 1));
    const auto d = generate_shaped_dataset(shaped_modes(), landmarks, o);
    auto out = open_out(a.out);
    for (const auto& s : d.summaries) out << encode_summary(s) << "\n";
    std::cerr << fmt::format("wrote {} summaries to {}\n", d.summaries.size(), a.out);
    return 0;
  }
  TelemetrySimOptions o;
  o.seed = a.seed;
  o.duration_s = a.minutes * 60.0;
  o.vehicles.clear();
  for (int v = 0; v < a.vehicles; ++v) o.vehicles.push_back(fmt::format("bus-{:02d}", v + 1));
  const auto records = generate_telemetry(o, landmarks);
  auto out = open_out(a.out);
  for (const auto& r : records) out << format_telemetry_line(r) << "\n";
  std::cerr << fmt::format("wrote {} records to {}\n", records.size(), a.out);
  return 0;
}

int run_aggregate(const AggregateArgs& a) {
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open " + a.input);
  const ReplayResult r = run_replay(in, load_profile(a.profile));
  auto out = open_out(a.out);
  for (const auto& s : r.summaries) out << encode_summary(s) << "\n";
  const json rep = report_json(r.report);
  if (!a.report.empty()) write_json(a.report, rep);
  std::cerr << rep.dump() << "\n";
  return 0;
}

int run_store_ingest(const StoreArgs& a) {
  SummaryStore store = SummaryStore::open_directory(a.root);
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open " + a.input);
  std::string line;
  std::int64_t n = 0;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      store.put(decode_summary(line));
    } catch (const CodecError& e) {
      throw CodecError(e.key(), fmt::format("{}:{}: {}", a.input, line_no, e.what()));
    }
    ++n;
  }
  std::cerr << fmt::format("ingested {} summaries into {} ({} total)\n", n, a.root, store.size());
  return 0;
}

int run_store_scan(const StoreArgs& a) {
  SummaryStore store = SummaryStore::open_directory(a.root);
  const QueryFilter filter = make_filter(a.filter);
  std::vector<StoredSummary> rows;
  if (a.model.empty()) {
    rows = store.scan(filter);
  } else {
    const BehaviorModel model = load_model(store, a.model);
    QueryFilter unlabeled = filter;
    unlabeled.label.reset();
    for (auto& r : store.scan(unlabeled)) {
      r.label = model.assign(r.summary);
      if (filter.matches(r.summary, r.label)) rows.push_back(std::move(r));
    }
  }
  for (const auto& r : rows) {
    json j = json::parse(encode_summary(r.summary));
    j["label"] = r.label ? json(*r.label) : json(nullptr);
    std::cout << j.dump() << "\n";
  }
  std::cerr << fmt::format("{} matching summaries\n", rows.size());
  return 0;
}

int run_cluster_fit(const ClusterArgs& a) {
  SummaryStore store = SummaryStore::open_directory(a.root);
  const auto rows = store.scan({});
  std::vector<FeatureVector> features;
  features.reserve(rows.size());
  for (const auto& r : rows) features.push_back(extract_features(r.summary));

  FitOptions opts;
  opts.seed = a.seed;
  opts.restarts = a.restarts;
  BehaviorModel model = fit(features, a.k, opts);
  model.version = store.latest_model_version().value_or(0) + 1;
  store.put_model(model.version, model.to_json().dump());

  LabelSet labels;
  std::vector<int> assignment;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto c = model.nearest(features[i]);
    assignment.push_back(static_cast<int>(c));
    labels.emplace(key_of(rows[i].summary), model.label_map[c]);
  }
  store.put_labels(model.version, labels);

  json summary = {{"version", model.version},
                  {"k", model.k},
                  {"windows", rows.size()},
                  {"objective", model.objective},
                  {"iterations", model.iterations}};
  json clusters = json::array();
  for (std::size_t i = 0; i < model.centroids.size(); ++i) {
    const auto f = model.centroid_features(i);
    clusters.push_back({{"label", model.label_map[i]},
                        {"count", model.cluster_sizes[i]},
                        {"instability", f.instability},
                        {"extreme_event_magnitude", f.extreme_event_magnitude}});
  }
  summary["clusters"] = clusters;
  if (model.k >= 2 && rows.size() <= 20000) summary["silhouette"] = silhouette(features, assignment);
  if (!a.out.empty()) write_json(a.out, model.to_json());
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_cluster_elbow(const ClusterArgs& a) {
  if (a.k_min > a.k_max) throw ConfigurationError("--k-min must not exceed --k-max");
  SummaryStore store = SummaryStore::open_directory(a.root);
  std::vector<FeatureVector> features;
  for (const auto& r : store.scan({})) features.push_back(extract_features(r.summary));
  FitOptions opts;
  opts.seed = a.seed;
  json out = json::array();
  for (const auto& [k, j] : elbow_curve(features, a.k_min, a.k_max, opts)) {
    out.push_back({{"k", k}, {"objective", j}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_query(const QueryArgs& a) {
  if (a.text.empty() && a.event.empty()) throw ConfigurationError("give a question or --event");
  auto engine = make_engine(a.engine);
  const Answer answer =
      a.event.empty() ? engine->answer(a.text) : engine->explain(parse_event(a.event), a.text);
  json out = answer.to_json();
  if (answer.validation.score < a.min_score) {
    out.erase("answer");
    out["withheld"] = fmt::format("score {} is below --min-score {}", answer.validation.score,
                                  a.min_score);
    std::cout << out.dump(2) << "\n";
    return 3;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  const json qs = json::parse(read_file(a.queries));
  if (!qs.is_array() || qs.empty()) throw ConfigurationError("queries file must be a non-empty JSON array");
  const bool grounded = a.strategy != "llm-only";
  const bool baseline = a.strategy != "grounded";

  auto engine = make_engine(a.engine);
  json rows = json::array();
  UsageReport total_grounded;
  UsageReport total_baseline;
  total_baseline.strategy = Strategy::kLlmOnly;
  for (const auto& q : qs) {
    const std::string text = q.is_string() ? q.get<std::string>() : q.at("text").get<std::string>();
    json row = {{"query", text}};
    // Fresh gateways so every query starts from a cold cache.
    if (grounded) {
      auto e = make_engine(a.engine, make_gateway(a.engine));
      const Answer ans = e->answer(text);
      row["intent"] = std::string(to_string(ans.plan.intent.category));
      row["grounded"] = ans.usage.to_json();
      row["validation"] = ans.validation.to_json();
      total_grounded.input_tokens += ans.usage.input_tokens;
      total_grounded.output_tokens += ans.usage.output_tokens;
      total_grounded.api_calls += ans.usage.api_calls;
      total_grounded.wall_latency_ms += ans.usage.wall_latency_ms;
    }
    if (baseline) {
      auto e = make_engine(a.engine, make_gateway(a.engine));
      const StrategyRun run = e->run_llm_only(text);
      row["llm_only"] = run.usage.to_json();
      total_baseline.input_tokens += run.usage.input_tokens;
      total_baseline.output_tokens += run.usage.output_tokens;
      total_baseline.api_calls += run.usage.api_calls;
      total_baseline.wall_latency_ms += run.usage.wall_latency_ms;
      total_baseline.throttle_ms += run.usage.throttle_ms;
    }
    if (grounded && baseline) {
      const double g = row["grounded"]["total_tokens"].get<double>();
      const double b = row["llm_only"]["total_tokens"].get<double>();
      row["token_ratio"] = b > 0 ? g / b : 0.0;
    }
    rows.push_back(row);
  }
  json report = {{"queries", rows}, {"windows", engine->windows()->size()}};
  if (grounded) {
    total_grounded.cost_usd = cost_usd(total_grounded.input_tokens, total_grounded.output_tokens);
    report["grounded_total"] = total_grounded.to_json();
  }
  if (baseline) {
    total_baseline.cost_usd = cost_usd(total_baseline.input_tokens, total_baseline.output_tokens);
    report["llm_only_total"] = total_baseline.to_json();
  }
  if (grounded && baseline && total_baseline.total_tokens() > 0) {
    report["token_reduction_pct"] =
        100.0 * (1.0 - static_cast<double>(total_grounded.total_tokens()) /
                           static_cast<double>(total_baseline.total_tokens()));
    report["cost_reduction_pct"] = 100.0 * (1.0 - total_grounded.cost_usd / total_baseline.cost_usd);
  }
  write_json(a.out, report);
  return 0;
}

namespace {
ApiService* g_service = nullptr;
extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}
}  // namespace

int run_serve(const ServeArgs& a) {
  auto engine = make_engine(a.engine);
  ApiService service(engine, a.static_dir);
  const int port = service.bind(a.host, a.port);
  if (port < 0) throw ConfigurationError(fmt::format("cannot bind {}:{}", a.host, a.port));
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << fmt::format("serving {} windows (model v{}) on http://{}:{}\n",
                           engine->windows()->size(), engine->model().version, a.host, port);
  const bool ok = service.listen();
  g_service = nullptr;
  return ok ? 0 : 1;
}

}  // namespace fleetlens::cli
