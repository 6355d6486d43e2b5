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

#include "geoagent/service/service.hpp"

#include <condition_variable>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "geoagent/error.hpp"

namespace geoagent::service {

namespace fs = std::filesystem;

namespace {

// 1x1 transparent PNG.
const unsigned char kTinyPng[] = {
    0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48,
    0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00,
    0x00, 0x1F, 0x15, 0xC4, 0x89, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x44, 0x41, 0x54, 0x78,
    0x9C, 0x63, 0x00, 0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0D, 0x0A, 0x2D, 0xB4, 0x00,
    0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82};

bool plain_name(const std::string& name) {
  return !name.empty() && name.find("..") == std::string::npos &&
         name.find('/') == std::string::npos && name.find('\\') == std::string::npos &&
         name.find('\0') == std::string::npos;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

// Substitutes {session} in every string of a backend config.
json with_session(json config, const std::string& session_id) {
  if (config.is_string()) return replace_all(config.get<std::string>(), "{session}", session_id);
  if (config.is_object() || config.is_array()) {
    for (auto& v : config) v = with_session(v, session_id);
  }
  return config;
}

}  // namespace

sandbox::TransportFactory scripted_worker() {
  return [] {
    return std::make_unique<sandbox::ScriptedTransport>(
        [](const std::string& code, int, const sandbox::Workspace& ws) -> std::optional<json> {
          static const std::regex savefig(R"(savefig\(\s*['"]([^'"]+)['"])");
          static const std::regex print(R"(print\(\s*['"]([^'"]*)['"]\s*\))");
          static const std::regex binding(R"(^\s*([A-Za-z_]\w*)\s*=[^=])");
          json reply = {{"status", "ok"},
                        {"stdout", ""},
                        {"stderr", ""},
                        {"bindings", json::array()},
                        {"duration_ms", 0}};
          std::string out;
          std::istringstream lines(code);
          std::string line;
          while (std::getline(lines, line)) {
            std::smatch m;
            if (std::regex_search(line, m, savefig) && plain_name(m[1].str())) {
              std::ofstream(ws.root_path / m[1].str(), std::ios::binary)
                  .write(reinterpret_cast<const char*>(kTinyPng), sizeof kTinyPng);
            }
            if (std::regex_search(line, m, print)) out += m[1].str() + "\n";
            if (std::regex_search(line, m, binding)) reply["bindings"].push_back(m[1].str());
          }
          reply["stdout"] = out;
          return reply;
        });
  };
}

ServiceConfig ServiceConfig::from_json(const json& v, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    fs::path path = p;
    return path.is_absolute() ? path : base_dir / path;
  };
  ServiceConfig c;
  try {
    c.root = resolve(v.at("root").get<std::string>());
    auto cat = std::make_shared<catalog::Catalog>();
    if (v.contains("catalog")) {
      for (auto& m : catalog::load_corpus(resolve(v.at("catalog").get<std::string>()))) {
        cat->ingest(std::move(m));
      }
    }
    c.catalog = cat;
    const json backends = v.value("backends", json::object());
    const json scripted_empty = {{"kind", "scripted"}};
    auto pick = [&](const char* key) {
      return backends.contains(key) ? backends.at(key) : scripted_empty;
    };
    c.backends = [planner = pick("planner"), primary = pick("primary"),
                  secondary = pick("secondary"), vision = pick("vision"),
                  base_dir](const std::string& id) {
      return BackendSet{llm::make_backend(with_session(planner, id), base_dir),
                        llm::make_backend(with_session(primary, id), base_dir),
                        llm::make_backend(with_session(secondary, id), base_dir),
                        llm::make_backend(with_session(vision, id), base_dir)};
    };
    c.search_llm = llm::make_backend(pick("search"), base_dir);
    if (v.contains("worker")) {
      const auto argv = v.at("worker").get<std::vector<std::string>>();
      c.worker = [argv] { return std::make_unique<sandbox::ProcessTransport>(argv); };
    }
    c.test_worker = scripted_worker();
    c.iteration_cap = v.value("iteration_cap", c.iteration_cap);
    c.repair_budget = v.value("repair_budget", c.repair_budget);
    c.exec_timeout_s = v.value("exec_timeout_s", c.exec_timeout_s);
    c.qc_threshold = v.value("qc_threshold", c.qc_threshold);
    c.qc_max_iter = v.value("qc_max_iter", c.qc_max_iter);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("service config: ") + e.what());
  }
  return c;
}

struct SessionManager::Session {
  std::string id;
  sandbox::Workspace workspace;
  std::unique_ptr<sandbox::KernelHandle> kernel;
  BackendSet backends;
  std::unique_ptr<EventLog> log;
  orchestrator::SessionState state;

  std::mutex mu;
  std::condition_variable idle_cv;
  bool busy = false;
  int turns = 0;
  std::thread worker;
};

SessionManager::SessionManager(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.catalog) config_.catalog = std::make_shared<catalog::Catalog>();
  if (!config_.clock) config_.clock = now_utc;
  if (!config_.new_session_id) config_.new_session_id = sandbox::new_uuid;
}

SessionManager::~SessionManager() { shutdown(); }

std::string SessionManager::create_session(bool test_mode) {
  const auto& factory = test_mode ? config_.test_worker : config_.worker;
  if (!factory) {
    throw Error(ErrorCode::SpawnFailure,
                test_mode ? "no scripted worker configured" : "no worker configured");
  }
  auto s = std::make_unique<Session>();
  s->id = config_.new_session_id();
  {
    std::lock_guard lock(mu_);
    if (sessions_.count(s->id)) throw Error(ErrorCode::DuplicateId, "session " + s->id + " exists");
  }
  s->workspace = sandbox::create_workspace(config_.root, s->id);
  try {
    s->log = std::make_unique<EventLog>(config_.root / ".events" / (s->id + ".jsonl"),
                                        config_.clock);
  } catch (const Error& e) {
    throw Error(ErrorCode::SpawnFailure, e.what());
  }
  s->kernel = std::make_unique<sandbox::KernelHandle>(s->workspace, factory());
  if (config_.backends) s->backends = config_.backends(s->id);
  auto fill = [](llm::BackendHandle& h) {
    if (!h) h = std::make_shared<llm::ScriptedBackend>();
  };
  fill(s->backends.planner);
  fill(s->backends.primary);
  fill(s->backends.secondary);
  fill(s->backends.vision);
  s->state.session_id = s->id;
  s->state.workspace_root = s->workspace.root_path;

  const auto id = s->id;
  std::lock_guard lock(mu_);
  sessions_.emplace(id, std::move(s));
  return id;
}

SessionManager::Session& SessionManager::find(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownId, "no session " + session_id);
  return *it->second;
}

std::string SessionManager::post_message(const std::string& session_id, const std::string& text) {
  Session& s = find(session_id);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "message text is blank");
  }
  std::lock_guard lock(s.mu);
  if (s.busy) throw Error(ErrorCode::SessionBusy, "a turn is already running in " + session_id);
  if (s.worker.joinable()) s.worker.join();
  s.busy = true;
  const std::string turn_id = session_id + "-turn-" + std::to_string(++s.turns);
  s.worker = std::thread([this, &s, text] { run_turn(s, text); });
  return turn_id;
}

void SessionManager::run_turn(Session& s, const std::string& text) {
  auto emit = [&s](const std::string& kind, const json& payload) { s.log->append(kind, payload); };
  try {
    orchestrator::Workers workers;
    workers.catalog = config_.catalog.get();
    workers.primary = s.backends.primary.get();
    workers.secondary = s.backends.secondary.get();
    workers.vlm = s.backends.vision.get();
    workers.kernel = s.kernel.get();
    workers.repair.budget = config_.repair_budget;
    workers.repair.timeout_s = config_.exec_timeout_s;
    workers.search = config_.search;
    workers.qc.threshold = config_.qc_threshold;
    workers.qc.max_iter = config_.qc_max_iter;

    orchestrator::SupervisorDeps deps;
    deps.planner = s.backends.planner.get();
    deps.catalog = config_.catalog.get();
    deps.emit = emit;
    deps.iteration_cap = config_.iteration_cap;
    deps.executors = orchestrator::default_executors(workers, emit);
    orchestrator::run_turn(text, s.state, deps);
  } catch (const std::exception& e) {
    try {
      emit("error", {{"message", e.what()}});
      emit("turn_done", {{"outcome", "error"}, {"steps", 0}});
    } catch (...) {
    }
  }
  std::lock_guard lock(s.mu);
  s.busy = false;
  s.idle_cv.notify_all();
}

EventLog& SessionManager::events(const std::string& session_id) { return *find(session_id).log; }

ArtifactBytes SessionManager::artifact(const std::string& session_id, const std::string& name) {
  Session& s = find(session_id);
  if (!plain_name(name)) {
    throw Error(ErrorCode::InvalidArgument, "artifact name '" + name + "' is not a plain file name");
  }
  const fs::path path = s.workspace.root_path / name;
  std::error_code ec;
  const auto st = fs::symlink_status(path, ec);
  if (ec || !fs::is_regular_file(st) || !sandbox::path_within(s.workspace.root_path, path)) {
    throw Error(ErrorCode::UnknownId, "no artifact '" + name + "' in session " + session_id);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnknownId, "cannot read artifact '" + name + "'");
  ArtifactBytes out;
  out.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  out.media_type = sandbox::media_type_for(path);
  return out;
}

search::RankedResults SessionManager::search(const std::string& query,
                                             const std::string& architecture) {
  const auto& cat = *config_.catalog;
  if (architecture == "baseline") return search::baseline_search(query, cat, config_.search.top_k);
  llm::BackendHandle llm = config_.search_llm;
  if (!llm) llm = std::make_shared<llm::ScriptedBackend>();
  if (architecture == "simple") {
    return search::simple_llm_search(query, cat, *llm, config_.search.top_k,
                                     config_.search.model_tag);
  }
  if (architecture == "agentic") return search::agentic_search(query, cat, *llm, config_.search);
  throw Error(ErrorCode::InvalidArgument,
              "architecture must be baseline, simple or agentic, got '" + architecture + "'");
}

bool SessionManager::busy(const std::string& session_id) {
  Session& s = find(session_id);
  std::lock_guard lock(s.mu);
  return s.busy;
}

void SessionManager::wait_idle(const std::string& session_id) {
  Session& s = find(session_id);
  std::unique_lock lock(s.mu);
  s.idle_cv.wait(lock, [&] { return !s.busy; });
}

fs::path SessionManager::workspace(const std::string& session_id) {
  return find(session_id).workspace.root_path;
}

std::vector<std::string> SessionManager::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

void SessionManager::shutdown() {
  std::vector<Session*> all;
  {
    std::lock_guard lock(mu_);
    for (auto& [_, s] : sessions_) all.push_back(s.get());
  }
  for (auto* s : all) {
    std::thread t;
    {
      std::lock_guard lock(s->mu);
      t = std::move(s->worker);
    }
    if (t.joinable()) t.join();
    s->log->close();
    if (s->kernel) s->kernel->shutdown();
  }
}

}  // namespace geoagent::service
