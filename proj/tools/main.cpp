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

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fleetlens/errors.hpp"

namespace {

using namespace fleetlens::cli;

void add_engine_options(CLI::App* app, EngineArgs& e) {
  app->add_option("--root,--store", e.root, "Summary store directory")->envname("FLEETLENS_STORE")->required();
  app->add_option("--model", e.model, "Model JSON (default: newest model in the store)");
  app->add_option("--landmarks", e.landmarks, "Landmark directory JSON (default: demo campus)");
  app->add_option("--planner", e.planner, "Planner config JSON");
  app->add_option("--validator", e.validator, "Validator config JSON");
  app->add_option("--backend", e.backend, "Backend config JSON (default: honest mock)");
  app->add_option("--seed", e.seed, "Mock backend seed");
}

void add_filter_options(CLI::App* app, FilterArgs& f) {
  app->add_option("--from", f.from, "Inclusive start, epoch ms or ISO-8601 UTC");
  app->add_option("--to", f.to, "Exclusive end, epoch ms or ISO-8601 UTC");
  app->add_option("--near", f.near, "lat,lon,radius_m");
  app->add_option("--label", f.label, "Behavior label");
  app->add_option("--min-gps", f.min_gps, "none | fix2d | fix3d");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleetlens: edge telemetry aggregation and grounded fleet analytics"};
  app.require_subcommand(1);
  int rc = 0;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate demo data");
  simulate->add_option("kind", sim.kind, "telemetry | summaries | landmarks")
      ->required()
      ->check(CLI::IsMember({"telemetry", "summaries", "landmarks"}));
  simulate->add_option("--out", sim.out, "Output file")->required();
  simulate->add_option("--minutes", sim.minutes, "Telemetry duration");
  simulate->add_option("--vehicles", sim.vehicles, "Vehicle count")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->callback([&] { rc = run_simulate(sim); });

  AggregateArgs agg;
  auto* aggregate = app.add_subcommand("aggregate", "Replay raw telemetry through the edge tier");
  aggregate->add_option("--input", agg.input, "Telemetry JSONL")->required();
  aggregate->add_option("--out", agg.out, "Summary packets JSONL")->required();
  aggregate->add_option("--report", agg.report, "Reduction report JSON");
  aggregate->add_option("--profile", agg.profile, "Sampling profile JSON");
  aggregate->callback([&] { rc = run_aggregate(agg); });

  StoreArgs st;
  auto* store = app.add_subcommand("store", "Summary store operations");
  store->require_subcommand(1);
  auto* ingest = store->add_subcommand("ingest", "Add summary packets");
  ingest->add_option("--root,--store", st.root, "Store directory")->envname("FLEETLENS_STORE")->required();
  ingest->add_option("--input", st.input, "Summary packets JSONL")->required();
  ingest->callback([&] { rc = run_store_ingest(st); });
  auto* scan = store->add_subcommand("scan", "Print matching summaries as JSONL");
  scan->add_option("--root,--store", st.root, "Store directory")->envname("FLEETLENS_STORE")->required();
  scan->add_option("--model", st.model, "Label with this model instead of the stored label set");
  add_filter_options(scan, st.filter);
  scan->callback([&] { rc = run_store_scan(st); });

  ClusterArgs cl;
  auto* cluster = app.add_subcommand("cluster", "Behavior clustering");
  cluster->require_subcommand(1);
  auto* fit = cluster->add_subcommand("fit", "Fit and store a new model version");
  fit->add_option("--root,--store", cl.root, "Store directory")->envname("FLEETLENS_STORE")->required();
  fit->add_option("--k", cl.k, "Cluster count")->check(CLI::PositiveNumber);
  fit->add_option("--seed", cl.seed, "Seed");
  fit->add_option("--restarts", cl.restarts, "Restarts")->check(CLI::PositiveNumber);
  fit->add_option("--out,--model-out", cl.out, "Also write the model JSON here");
  fit->callback([&] { rc = run_cluster_fit(cl); });
  auto* elbow = cluster->add_subcommand("elbow", "Objective for a range of k");
  elbow->add_option("--root,--store", cl.root, "Store directory")->envname("FLEETLENS_STORE")->required();
  elbow->add_option("--k-min", cl.k_min, "Smallest k")->check(CLI::PositiveNumber);
  elbow->add_option("--k-max", cl.k_max, "Largest k")->check(CLI::PositiveNumber);
  elbow->add_option("--seed", cl.seed, "Seed");
  elbow->callback([&] { rc = run_cluster_elbow(cl); });

  QueryArgs q;
  auto* query = app.add_subcommand("query", "Ask questions");
  query->require_subcommand(1);
  auto* ask = query->add_subcommand("ask", "Answer a question or explain one event");
  ask->add_option("text", q.text, "Question");
  ask->add_option("--event", q.event, "Explain this window: vehicle@window_start");
  ask->add_option("--min-score", q.min_score, "Withhold answers scoring below this")
      ->check(CLI::Range(0, 100));
  add_engine_options(ask, q.engine);
  ask->callback([&] { rc = run_query(q); });

  BenchArgs b;
  auto* bench = app.add_subcommand("bench", "Compare the grounded and raw-data strategies");
  bench->add_option("--queries", b.queries, "JSON array of questions")->required();
  bench->add_option("--strategy", b.strategy, "both | grounded | llm-only")
      ->check(CLI::IsMember({"both", "grounded", "llm-only"}));
  bench->add_option("--out", b.out, "Report JSON (default stdout)");
  add_engine_options(bench, b.engine);
  bench->callback([&] { rc = run_bench(b); });

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", sv.host, "Bind address");
  serve->add_option("--port", sv.port, "Port")->envname("FLEETLENS_PORT");
  serve->add_option("--static", sv.static_dir, "Serve files from this directory at /");
  add_engine_options(serve, sv.engine);
  serve->callback([&] { rc = run_serve(sv); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const fleetlens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
