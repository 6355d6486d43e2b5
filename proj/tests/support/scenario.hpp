// Copyright 2026 The GeoAgent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Scripted two-task session: a gridded currents record, an analysis task,
// a figure that passes review on the second try, and a report.

#include <atomic>
#include <memory>
#include <string>

#include "geoagent/llm/backends.hpp"
#include "geoagent/orchestrator/orchestrator.hpp"
#include "geoagent/qc/qc.hpp"
#include "geoagent/sandbox/repair.hpp"
#include "geoagent/service/service.hpp"

namespace testutil {

using nlohmann::json;

inline geoagent::catalog::DatasetMetadata currents_record() {
  geoagent::catalog::DatasetMetadata m;
  m.id = "cmems-glo-phy-cur";
  m.title = "Global ocean physics reanalysis currents";
  m.parameters = {{"uo", "m s-1"}, {"vo", "m s-1"}};
  m.geo = geoagent::catalog::GeoExtent{-80, 90, -180, 180};
  m.time = geoagent::catalog::TimeExtent{geoagent::parse_instant("1993-01-01"),
                                         geoagent::parse_instant("2023-12-31")};
  m.depth = geoagent::catalog::DepthExtent{0.5, 5500};
  m.layout = geoagent::catalog::Layout::Gridded;
  m.size_bytes = 5ull << 30;
  return m;
}

inline std::shared_ptr<geoagent::catalog::Catalog> scenario_catalog() {
  auto c = std::make_shared<geoagent::catalog::Catalog>();
  c->ingest(currents_record());
  return c;
}

inline json critique_reply(int score, bool pass) {
  json dims = json::array();
  for (const char* d : geoagent::qc::kDimensions) {
    dims.push_back({{"name", d}, {"pass", pass}, {"note", pass ? "fine" : "unlabelled"}});
  }
  json out = {{"composite", score}, {"dimensions", dims}, {"feedback", json::array()}};
  if (!pass) out["feedback"] = json::array({"label both axes with units", "add a colorbar"});
  return out;
}

/// Rules as JSON so they can be written to disk and loaded per session.
inline json planner_rules() {
  json tasks = json::array(
      {{{"description", "Compute the mean surface current speed"},
        {"kind", "analysis"},
        {"dataset_refs", {"cmems-glo-phy-cur"}}},
       {{"description", "Map the mean surface current speed"},
        {"kind", "visualization"},
        {"dataset_refs", {"cmems-glo-phy-cur"}}}});
  return json::array(
      {{{"contains", {geoagent::orchestrator::kPlanMarker}},
        {"response", {{"structured", {{"tasks", tasks}}}}}}});
}

inline json primary_rules() {
  using namespace geoagent;
  return json::array(
      {{{"contains", {sandbox::kGenerateMarker, "Visualization agent"}},
        {"response", {{"text", "```python\nplt.savefig('speed_map.png')\n```"}}}},
       {{"contains", {sandbox::kGenerateMarker}},
        {"response",
         {{"text", "```python\nmean_speed = 0.31\nprint('mean speed 0.31 m/s')\n```"}}}},
       {{"contains", {orchestrator::kReportMarker}},
        {"response", {{"text", "Mean surface current speed is 0.31 m/s; see speed_map.png."}}}}});
}

inline json vision_rules() {
  using namespace geoagent;
  return json::array({{{"contains", {qc::kCritiqueMarker}},
                       {"response", {{"structured", critique_reply(3, false)}}},
                       {"consume_once", true}},
                      {{"contains", {qc::kCritiqueMarker}},
                       {"response", {{"structured", critique_reply(9, true)}}}}});
}

inline geoagent::service::BackendSet scenario_backends() {
  using geoagent::llm::ScriptedBackend;
  auto make = [](const json& rules) {
    auto b = std::make_shared<ScriptedBackend>();
    b->load_rules(rules);
    return b;
  };
  return {make(planner_rules()), make(primary_rules()), std::make_shared<ScriptedBackend>(),
          make(vision_rules())};
}

/// Each call returns the next second after 2026-01-01.
inline geoagent::service::Clock ticking_clock() {
  auto t = std::make_shared<std::atomic<long>>(0);
  return [t] { return geoagent::parse_instant("2026-01-01") + std::chrono::seconds((*t)++); };
}

/// ids s-0001, s-0002, ...
inline std::function<std::string()> counting_ids(const std::string& prefix = "s-") {
  auto n = std::make_shared<std::atomic<int>>(0);
  return [n, prefix] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", ++*n);
    return prefix + buf;
  };
}

inline geoagent::service::ServiceConfig scenario_config(const std::filesystem::path& root) {
  geoagent::service::ServiceConfig c;
  c.root = root;
  c.catalog = scenario_catalog();
  c.backends = [](const std::string&) { return scenario_backends(); };
  c.test_worker = geoagent::service::scripted_worker();
  c.new_session_id = counting_ids();
  c.clock = ticking_clock();
  return c;
}

inline const std::vector<std::string>& scenario_event_kinds() {
  static const std::vector<std::string> kinds = {
      "plan",           "agent_action",     "code_submitted", "execution_result",
      "agent_action",   "code_submitted",   "execution_result", "code_submitted",
      "execution_result", "figure",         "critique",       "figure",
      "critique",       "report",           "turn_done"};
  return kinds;
}

}  // namespace testutil
