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

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "geoagent/catalog/catalog.hpp"
#include "geoagent/llm/backends.hpp"
#include "geoagent/orchestrator/orchestrator.hpp"
#include "geoagent/sandbox/kernel.hpp"
#include "geoagent/search/search.hpp"
#include "geoagent/service/event_log.hpp"

namespace geoagent::service {

/// Model backends for one session.
struct BackendSet {
  llm::BackendHandle planner;
  llm::BackendHandle primary;
  llm::BackendHandle secondary;
  llm::BackendHandle vision;
};

using BackendFactory = std::function<BackendSet(const std::string& session_id)>;

struct ServiceConfig {
  std::filesystem::path root;  // workspaces and .events/
  std::shared_ptr<const catalog::Catalog> catalog;
  BackendFactory backends;
  llm::BackendHandle search_llm;
  sandbox::TransportFactory worker;       // production kernel; empty: none available
  sandbox::TransportFactory test_worker;  // selected by the test-mode header
  Clock clock = now_utc;
  std::function<std::string()> new_session_id = sandbox::new_uuid;

  int iteration_cap = orchestrator::kDefaultIterationCap;
  int repair_budget = sandbox::kDefaultRepairBudget;
  double exec_timeout_s = sandbox::kDefaultTimeoutS;
  int qc_threshold = qc::kDefaultThreshold;
  int qc_max_iter = qc::kMaxIterations;
  search::SearchConfig search;

  /// Reads the service config file. Relative paths resolve against
  /// `base_dir`. Keys: root, catalog, backends{planner, primary,
  /// secondary, vision, search}, worker (argv), iteration_cap,
  /// repair_budget, exec_timeout_s, qc_threshold, qc_max_iter.
  static ServiceConfig from_json(const json& value, const std::filesystem::path& base_dir);
};

/// Scripted worker for test mode: `savefig('<name>')` writes a small PNG
/// into the workspace, `name = ...` lines are declared as bindings, and
/// `print('<text>')` lines go to stdout. Durations are reported as 0.
sandbox::TransportFactory scripted_worker();

struct ArtifactBytes {
  std::string bytes;
  std::string media_type;
};

/// Sessions, turns and their event logs. Turns run on their own thread;
/// a session accepts one turn at a time.
class SessionManager {
 public:
  explicit SessionManager(ServiceConfig config);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Throws SpawnFailure when the workspace, log or kernel cannot be set up.
  std::string create_session(bool test_mode);

  /// Starts a supervisor turn and returns its id. Throws UnknownId,
  /// SessionBusy while a turn runs, InvalidArgument for blank text.
  std::string post_message(const std::string& session_id, const std::string& text);

  /// Throws UnknownId.
  EventLog& events(const std::string& session_id);

  /// `name` is a file name inside the workspace. Throws InvalidArgument
  /// for separators or "..", UnknownId when absent.
  ArtifactBytes artifact(const std::string& session_id, const std::string& name);

  /// Throws InvalidArgument for an unknown architecture.
  search::RankedResults search(const std::string& query, const std::string& architecture);

  bool busy(const std::string& session_id);
  void wait_idle(const std::string& session_id);
  std::filesystem::path workspace(const std::string& session_id);
  std::vector<std::string> session_ids() const;

  /// Waits for running turns and stops every kernel.
  void shutdown();

  const ServiceConfig& config() const { return config_; }

 private:
  struct Session;
  Session& find(const std::string& session_id);
  void run_turn(Session& s, const std::string& text);

  ServiceConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

}  // namespace geoagent::service
