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

#include "geoagent/orchestrator/orchestrator.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::orchestrator {

namespace {

constexpr std::pair<AgentRole, const char*> kRoles[] = {
    {AgentRole::Supervisor, "Supervisor"}, {AgentRole::Oceanographer, "Oceanographer"},
    {AgentRole::Ecologist, "Ecologist"},   {AgentRole::Visualization, "Visualization"},
    {AgentRole::DataFrame, "DataFrame"},   {AgentRole::Writer, "Writer"},
    {AgentRole::Search, "Search"},         {AgentRole::Wise, "Wise"}};

constexpr std::pair<TaskKind, const char*> kKinds[] = {{TaskKind::Analysis, "analysis"},
                                                       {TaskKind::Visualization, "visualization"},
                                                       {TaskKind::Retrieval, "retrieval"},
                                                       {TaskKind::Synthesis, "synthesis"}};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool contains(const std::string& haystack, const char* needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

std::string_view to_string(AgentRole role) {
  for (const auto& [r, n] : kRoles) {
    if (r == role) return n;
  }
  return "Supervisor";
}

AgentRole role_from_string(std::string_view text) {
  for (const auto& [r, n] : kRoles) {
    if (text == n) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown role '" + std::string(text) + "'");
}

std::string_view to_string(TaskKind kind) {
  for (const auto& [k, n] : kKinds) {
    if (k == kind) return n;
  }
  return "analysis";
}

TaskKind kind_from_string(std::string_view text) {
  for (const auto& [k, n] : kKinds) {
    if (text == n) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown task kind '" + std::string(text) + "'");
}

std::string_view to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Running: return "running";
    case TaskStatus::Done: return "done";
    case TaskStatus::Failed: return "failed";
  }
  return "pending";
}

// ---- Plan

void Plan::replace(std::vector<Task> tasks) {
  if (running() > 0) throw Error(ErrorCode::InvalidArgument, "cannot replace a plan mid-task");
  tasks_ = std::move(tasks);
  ++revision_;
}

void Plan::insert_after(const std::string& after_id, std::vector<Task> tasks) {
  auto it = std::find_if(tasks_.begin(), tasks_.end(),
                         [&](const Task& t) { return t.id == after_id; });
  if (it != tasks_.end()) ++it;
  tasks_.insert(it, std::make_move_iterator(tasks.begin()), std::make_move_iterator(tasks.end()));
  ++revision_;
}

Task& Plan::at(const std::string& id) {
  for (auto& t : tasks_) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::InvalidArgument, "no task " + id);
}

const Task& Plan::get(const std::string& id) const { return const_cast<Plan*>(this)->at(id); }

void Plan::start(const std::string& id) {
  Task& t = at(id);
  if (t.status != TaskStatus::Pending) {
    throw Error(ErrorCode::InvalidArgument, "task " + id + " is " + std::string(to_string(t.status)));
  }
  if (running() > 0) throw Error(ErrorCode::InvalidArgument, "another task is running");
  t.status = TaskStatus::Running;
  ++revision_;
}

void Plan::finish(const std::string& id, bool ok, std::string summary) {
  Task& t = at(id);
  if (t.status != TaskStatus::Running) {
    throw Error(ErrorCode::InvalidArgument, "task " + id + " is not running");
  }
  t.status = ok ? TaskStatus::Done : TaskStatus::Failed;
  t.result_summary = std::move(summary);
  ++revision_;
}

const Task* Plan::next_pending() const {
  for (const auto& t : tasks_) {
    if (t.status == TaskStatus::Pending) return &t;
  }
  return nullptr;
}

std::size_t Plan::running() const { return count(TaskStatus::Running); }

std::size_t Plan::count(TaskStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      tasks_.begin(), tasks_.end(), [&](const Task& t) { return t.status == status; }));
}

json to_json(const Task& t) {
  json out = {{"id", t.id},
              {"description", t.description},
              {"kind", to_string(t.kind)},
              {"status", to_string(t.status)},
              {"dataset_refs", t.dataset_refs},
              {"artifact_refs", t.artifact_refs},
              {"external", t.external_retrieval}};
  if (t.preferred_role) out["role"] = to_string(*t.preferred_role);
  if (!t.result_summary.empty()) out["result"] = t.result_summary;
  return out;
}

json to_json(const Plan& p) {
  json tasks = json::array();
  for (const auto& t : p.tasks()) tasks.push_back(to_json(t));
  return {{"revision", p.revision()}, {"tasks", tasks}};
}

// ---- Routing

const std::set<std::string>& default_taxa_lexicon() {
  static const std::set<std::string> lexicon = {
      "abundance", "amphipoda", "annelida",    "bivalvia",     "calanus",     "chaetognatha",
      "ciliate",   "cnidaria",  "copepod",     "crustacea",    "ctenophora",  "diatom",
      "dinoflagellate", "echinodermata", "euphausiid", "foraminifera", "gastropoda", "krill",
      "larvae",    "mollusca",  "nematoda",    "ostracoda",    "polychaeta",  "pteropod",
      "radiolaria", "species",  "taxon",       "zooplankton",  "phytoplankton"};
  return lexicon;
}

bool is_taxonomic(const catalog::DatasetMetadata& meta, const std::set<std::string>& lexicon,
                  int minimum) {
  int hits = 0;
  for (const auto& p : meta.parameters) {
    const auto name = lower(p.name);
    for (const auto& term : lexicon) {
      if (name.find(lower(term)) != std::string::npos) {
        ++hits;
        break;
      }
    }
  }
  return hits >= minimum;
}

RefProfile profile_for(const catalog::DatasetMetadata& meta, const std::set<std::string>& lexicon) {
  return RefProfile{catalog::derive_feature_flags(meta), is_taxonomic(meta, lexicon)};
}

namespace {

std::vector<const RefProfile*> resolve(const Task& task,
                                       const std::map<std::string, RefProfile>& profiles) {
  std::vector<const RefProfile*> out;
  for (const auto& ref : task.dataset_refs) {
    auto it = profiles.find(ref);
    if (it == profiles.end()) {
      throw Error(ErrorCode::UnresolvedRef, "task " + task.id + " references unknown dataset " + ref);
    }
    out.push_back(&it->second);
  }
  return out;
}

bool any_gridded(const Task& task, const std::map<std::string, RefProfile>& profiles) {
  for (const auto& ref : task.dataset_refs) {
    auto it = profiles.find(ref);
    if (it != profiles.end() && it->second.flags.is_gridded) return true;
  }
  return false;
}

}  // namespace

AgentRole route(const Task& task, const std::map<std::string, RefProfile>& profiles) {
  const auto refs = resolve(task, profiles);
  switch (task.kind) {
    case TaskKind::Visualization: return AgentRole::Visualization;
    case TaskKind::Retrieval:
      return task.external_retrieval ? AgentRole::Oceanographer : AgentRole::Search;
    case TaskKind::Synthesis: return AgentRole::Writer;
    case TaskKind::Analysis: break;
  }
  bool all_taxonomic = !refs.empty();
  for (const auto* p : refs) {
    if (p->flags.is_gridded) return AgentRole::Oceanographer;
    all_taxonomic = all_taxonomic && p->taxonomic;
  }
  return all_taxonomic ? AgentRole::Ecologist : AgentRole::DataFrame;
}

std::optional<std::string> enforce_role_constraints(
    const Task& task, AgentRole role, const std::map<std::string, RefProfile>& profiles) {
  if (role == AgentRole::Supervisor) return "tasks are never dispatched to the Supervisor";
  if (task.kind == TaskKind::Visualization && role == AgentRole::DataFrame) {
    return "the DataFrame agent may not produce visualizations";
  }
  if (task.kind == TaskKind::Analysis && any_gridded(task, profiles) &&
      (role == AgentRole::DataFrame || role == AgentRole::Ecologist)) {
    return "gridded data may not be routed to the " + std::string(to_string(role)) + " agent";
  }
  return std::nullopt;
}

// ---- Session state

std::map<std::string, RefProfile> SessionState::profiles() const {
  std::map<std::string, RefProfile> out;
  for (const auto& [id, d] : loaded) out[id] = d.profile;
  return out;
}

void SessionState::add_artifact(const sandbox::ArtifactRecord& a) {
  if (!sandbox::path_within(workspace_root, a.path)) {
    throw Error(ErrorCode::IsolationViolation,
                "artifact " + a.path + " is outside workspace " + workspace_root.string());
  }
  if (std::find(artifacts.begin(), artifacts.end(), a) == artifacts.end()) artifacts.push_back(a);
}

// ---- Planning

const json& plan_schema() {
  static const json schema = [] {
    json kinds = json::array();
    for (const auto& [k, n] : kKinds) kinds.push_back(n);
    json roles = json::array();
    for (const auto& [r, n] : kRoles) {
      if (r != AgentRole::Supervisor) roles.push_back(n);
    }
    const json strings = {{"type", "array"}, {"items", {{"type", "string"}}}};
    return json{
        {"type", "object"},
        {"required", {"tasks"}},
        {"properties",
         {{"tasks",
           {{"type", "array"},
            {"minItems", 1},
            {"items",
             {{"type", "object"},
              {"required", {"description", "kind"}},
              {"properties",
               {{"id", {{"type", "string"}}},
                {"description", {{"type", "string"}, {"minLength", 1}}},
                {"kind", {{"type", "string"}, {"enum", kinds}}},
                {"dataset_refs", strings},
                {"artifact_refs", strings},
                {"external", {{"type", "boolean"}}},
                {"role", {{"type", "string"}, {"enum", roles}}}}},
              {"additionalProperties", false}}}}},
          {"rationale", {{"type", "string"}}}}},
        {"additionalProperties", false}};
  }();
  return schema;
}

namespace {

void describe_state(std::ostringstream& out, const SessionState& state) {
  out << "\n" << memory::render(state.ledger) << "\n";
  out << "\nLoaded datasets:\n";
  for (const auto& [id, d] : state.loaded) out << "- " << id << " at " << d.workspace_path.string() << "\n";
  out << "\nArtifacts:\n";
  for (const auto& a : state.artifacts) out << "- " << a.path << " (" << a.media_type << ")\n";
}

std::vector<Task> tasks_from_reply(const json& v, SessionState& state, bool revision) {
  std::vector<Task> tasks;
  for (const auto& item : v.at("tasks")) {
    Task t;
    t.id = "t" + std::to_string(state.next_task_number++);
    t.description = item.at("description").get<std::string>();
    t.kind = kind_from_string(item.at("kind").get<std::string>());
    t.dataset_refs = item.value("dataset_refs", std::vector<std::string>{});
    t.artifact_refs = item.value("artifact_refs", std::vector<std::string>{});
    t.external_retrieval = item.value("external", false);
    if (item.contains("role")) t.preferred_role = role_from_string(item.at("role").get<std::string>());
    t.from_revision = revision;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

llm::ChatRequest planner_request(const std::string& model_tag, std::string body) {
  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.response_schema = plan_schema();
  req.messages = {
      llm::Message::text(llm::Role::System,
                         "You are the Supervisor of a team of ocean-science agents. Break the "
                         "request into ordered sub-tasks of kind analysis, visualization, "
                         "retrieval or synthesis. Set external=true for retrieval of reanalysis "
                         "or model fields from outside the archive."),
      llm::Message::text(llm::Role::User, std::move(body))};
  return req;
}

}  // namespace

Plan& plan_decompose(const std::string& user_msg, SessionState& state, llm::Backend& planner,
                     const std::string& model_tag) {
  if (user_msg.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "empty user message");
  }
  std::ostringstream body;
  body << kPlanMarker << "\nUser request:\n" << user_msg << "\n";
  describe_state(body, state);
  const auto reply = llm::complete(planner_request(model_tag, body.str()), planner);
  state.plan.replace(tasks_from_reply(*reply.structured, state, false));
  return state.plan;
}

namespace {

std::optional<std::vector<Task>> revise(const Task& failed, SessionState& state,
                                        SupervisorDeps& deps) {
  if (!deps.planner) return std::nullopt;
  std::ostringstream body;
  body << kReviseMarker << "\nFailed task: " << failed.description
       << "\nKind: " << to_string(failed.kind) << "\nError: " << failed.result_summary
       << "\nPropose replacement tasks.\n";
  describe_state(body, state);
  try {
    const auto reply = llm::complete(planner_request(deps.planner_model, body.str()), *deps.planner);
    return tasks_from_reply(*reply.structured, state, true);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void emit(SupervisorDeps& deps, const std::string& kind, const json& payload) {
  if (deps.emit) deps.emit(kind, payload);
}

std::string dataset_dir_name(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += safe ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

// Adds missing refs to state.loaded from the catalog. Unknown ids are left
// out so routing reports them.
void load_refs(const Task& task, SessionState& state, SupervisorDeps& deps) {
  for (const auto& ref : task.dataset_refs) {
    if (state.loaded.count(ref) || !deps.catalog) continue;
    auto meta = deps.catalog->find(ref);
    if (!meta) continue;
    state.loaded[ref] = LoadedDataset{state.workspace_root / "data" / dataset_dir_name(ref),
                                      profile_for(*meta, deps.taxa_lexicon)};
  }
}

std::string partial_message(const SessionState& state, int cap) {
  std::ostringstream out;
  out << "Stopped after " << cap << " supervisor turns. Partial results:";
  bool any = false;
  for (const auto& t : state.plan.tasks()) {
    if (t.status != TaskStatus::Done) continue;
    out << "\n- " << t.description;
    if (!t.result_summary.empty()) out << ": " << t.result_summary;
    any = true;
  }
  if (!any) out << " none.";
  return out.str();
}

}  // namespace

StepOutcome supervisor_step(SessionState& state, SupervisorDeps& deps) {
  const Task* next = state.plan.next_pending();
  if (!next) return StepOutcome{StepKind::TurnComplete, {}, std::nullopt, false, "plan complete"};
  if (state.supervisor_turns >= deps.iteration_cap) {
    return StepOutcome{StepKind::CapExceeded, next->id, std::nullopt, false,
                       partial_message(state, deps.iteration_cap)};
  }
  ++state.supervisor_turns;
  const Task task = *next;
  StepOutcome out{StepKind::Dispatched, task.id, std::nullopt, false, {}};

  std::optional<AgentRole> role;
  std::string failure;
  try {
    load_refs(task, state, deps);
    const auto profiles = state.profiles();
    const AgentRole table = route(task, profiles);
    role = task.preferred_role.value_or(table);
    if (auto violation = enforce_role_constraints(task, *role, profiles)) {
      emit(deps, "error", {{"task_id", task.id}, {"message", *violation}, {"rerouted_to", to_string(table)}});
      role = table;
      if (auto again = enforce_role_constraints(task, *role, profiles)) {
        failure = *again;
        role.reset();
      }
    }
  } catch (const Error& e) {
    failure = e.what();
  }

  state.plan.start(task.id);
  TaskResult result;
  if (role) {
    out.role = role;
    emit(deps, "agent_action",
         {{"task_id", task.id}, {"role", to_string(*role)}, {"description", task.description}});
    auto it = deps.executors.find(*role);
    if (it == deps.executors.end() || !it->second) {
      result = {false, "no executor for role " + std::string(to_string(*role))};
    } else {
      try {
        result = it->second(task, *role, state);
      } catch (const Error& e) {
        result = {false, e.what()};
      }
    }
  } else {
    result = {false, failure};
  }
  state.plan.finish(task.id, result.ok, result.summary);
  out.task_ok = result.ok;
  out.message = result.summary;

  if (!result.ok) {
    emit(deps, "error", {{"task_id", task.id}, {"message", result.summary}});
    if (!task.from_revision) {
      if (auto replacement = revise(state.plan.get(task.id), state, deps)) {
        state.plan.insert_after(task.id, std::move(*replacement));
        emit(deps, "plan", to_json(state.plan));
      }
    }
  }
  return out;
}

// ---- Report

std::string synthesize_report(SessionState& state, llm::Backend& backend,
                              const std::string& model_tag) {
  if (state.plan.count(TaskStatus::Done) == 0) {
    throw Error(ErrorCode::InvalidArgument, "no completed task to report on");
  }
  std::ostringstream body;
  body << kReportMarker << "\n";
  for (auto it = state.history.rbegin(); it != state.history.rend(); ++it) {
    if (it->role == llm::Role::User) {
      body << "User request:\n" << it->joined_text() << "\n";
      break;
    }
  }
  body << "\nCompleted tasks:\n";
  for (const auto& t : state.plan.tasks()) {
    if (t.status == TaskStatus::Done && t.kind != TaskKind::Synthesis) {
      body << "- " << t.description;
      if (!t.result_summary.empty()) body << ": " << t.result_summary;
      body << "\n";
    }
  }
  body << "\n" << memory::render(state.ledger) << "\n";
  body << "\nArtifacts:\n";
  for (const auto& a : state.artifacts) {
    body << "- " << a.path << " (" << a.media_type << ")";
    auto c = state.critiques.find(a.path);
    if (c != state.critiques.end()) {
      body << " critique " << c->second.composite << "/10";
      for (const auto& f : c->second.feedback) body << "; " << f;
    }
    body << "\n";
  }
  body << "\nWrite a coherent scientific narrative of the findings.\n";

  llm::Message user;
  user.role = llm::Role::User;
  user.parts.push_back(body.str());
  if (backend.supports_vision(model_tag)) {
    for (const auto& a : state.artifacts) {
      if (!sandbox::is_image_media_type(a.media_type)) continue;
      try {
        auto img = qc::load_image(a.path);
        qc::check_image(img);
        user.parts.push_back(llm::ImagePart{std::move(img.bytes), a.media_type});
      } catch (const Error&) {
      }
    }
  }
  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.messages = {llm::Message::text(llm::Role::System,
                                     "You are the Writer agent. Report only what the results "
                                     "support."),
                  std::move(user)};
  const auto reply = llm::complete(req, backend);
  state.history.push_back(llm::Message::text(llm::Role::Assistant, reply.text));
  return reply.text;
}

// ---- Executors

std::string role_prompt(AgentRole role) {
  switch (role) {
    case AgentRole::Oceanographer:
      return "You are the Oceanographer agent. You analyse gridded ocean model and reanalysis "
             "fields with xarray: subsetting, vertical and temporal aggregation, derived "
             "quantities. Answer with one fenced python code block.";
    case AgentRole::Ecologist:
      return "You are the Ecologist agent. You analyse species and abundance tables with pandas: "
             "diversity indices, community statistics, group comparisons. Answer with one "
             "fenced python code block.";
    case AgentRole::DataFrame:
      return "You are the DataFrame agent. You work on flat tables with pandas. You never "
             "produce figures. Answer with one fenced python code block.";
    case AgentRole::Visualization:
      return "You are the Visualization agent. You draw publication-quality figures with "
             "matplotlib and cartopy and save each as a PNG in the working directory. Answer "
             "with one fenced python code block.";
    case AgentRole::Search: return "You are the Search agent.";
    case AgentRole::Writer: return "You are the Writer agent.";
    case AgentRole::Wise: return "You are the senior reviewing agent.";
    case AgentRole::Supervisor: return "You are the Supervisor.";
  }
  return {};
}

namespace {

std::string task_text(const Task& task, const SessionState& state) {
  std::ostringstream out;
  out << task.description << "\n";
  for (const auto& ref : task.dataset_refs) {
    auto it = state.loaded.find(ref);
    if (it == state.loaded.end()) continue;
    const auto& f = it->second.profile.flags;
    out << "Dataset " << ref << " at " << it->second.workspace_path.string()
        << (f.is_gridded ? " (gridded" : " (tabular") << (f.has_depth_axis ? ", depth" : "")
        << (f.has_time ? ", time" : "") << (f.has_geo ? ", geo" : "") << ")\n";
  }
  for (const auto& a : task.artifact_refs) out << "Previous artifact: " << a << "\n";
  return out.str();
}

std::pair<std::string, std::string> exemplar_tags(const Task& task, const SessionState& state) {
  const auto text = lower(task.description);
  bool gridded = false;
  for (const auto& ref : task.dataset_refs) {
    auto it = state.loaded.find(ref);
    if (it != state.loaded.end() && it->second.profile.flags.is_gridded) gridded = true;
  }
  if (contains(text, "rose")) return {"tabular", "wind_rose"};
  if (contains(text, "profile")) return {"profile", "vertical_profile"};
  if (contains(text, "time series") || contains(text, "timeseries")) return {"timeseries", "line"};
  if (contains(text, "track") || contains(text, "trajectory")) return {"trajectory", "map"};
  if (gridded) {
    if (contains(text, "section") || contains(text, "transect")) return {"gridded", "section"};
    if (contains(text, "vector") || contains(text, "quiver") || contains(text, "arrow")) {
      return {"gridded", "vectors"};
    }
    return {"gridded", "map"};
  }
  if (contains(text, "box") || contains(text, "distribution") || contains(text, "violin")) {
    return {"tabular", "distribution"};
  }
  return {"tabular", "scatter"};
}

std::string head(const std::string& s, std::size_t n = 300) {
  std::string out = s.size() > n ? s.substr(0, n) + "..." : s;
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string("executor is missing ") + what);
}

sandbox::RepairConfig role_config(const Workers& w, AgentRole role, const Task& task,
                                  const SessionState& state, const EventSink& emit) {
  sandbox::RepairConfig cfg = w.repair;
  cfg.role = std::string(to_string(role));
  cfg.system_prompt = role_prompt(role);
  cfg.context_block = memory::render(state.ledger);
  if (emit) {
    const auto id = task.id;
    cfg.on_attempt = [emit, id](const sandbox::RepairAttempt& a) {
      if (!a.code.empty()) emit("code_submitted", {{"task_id", id}, {"code", a.code}});
      emit("execution_result", {{"task_id", id}, {"result", sandbox::to_json(a.result)}});
    };
  }
  return cfg;
}

}  // namespace

std::map<AgentRole, Executor> default_executors(const Workers& w, EventSink emit) {
  std::map<AgentRole, Executor> out;

  Executor coding = [w, emit](const Task& task, AgentRole role, SessionState& state) {
    require(w.kernel, "kernel");
    require(w.primary, "primary model");
    require(w.secondary, "secondary model");
    auto cfg = role_config(w, role, task, state, emit);
    auto outcome = sandbox::repair_loop(task_text(task, state), *w.kernel, *w.primary,
                                        *w.secondary, cfg);
    if (outcome.kind == sandbox::OutcomeKind::Failed) {
      std::string why = outcome.error.value_or("");
      if (why.empty() && outcome.result && outcome.result->traceback) {
        why = outcome.result->traceback->exception_type + ": " + outcome.result->traceback->message;
      }
      return TaskResult{false, "failed after " + std::to_string(outcome.context.attempts.size()) +
                                   " attempts: " + why};
    }
    memory::update_ledger(state.ledger, *outcome.result, state.workspace_root);
    for (const auto& a : outcome.result->new_artifacts) state.add_artifact(a);
    std::string summary = outcome.kind == sandbox::OutcomeKind::Escalated ? "resolved on escalation"
                                                                          : "completed";
    if (!outcome.result->stdout_text.empty()) summary += ": " + head(outcome.result->stdout_text);
    return TaskResult{true, summary};
  };
  out[AgentRole::Oceanographer] = coding;
  out[AgentRole::Ecologist] = coding;
  out[AgentRole::DataFrame] = coding;

  out[AgentRole::Visualization] = [w, emit](const Task& task, AgentRole role, SessionState& state) {
    require(w.kernel, "kernel");
    require(w.primary, "primary model");
    require(w.secondary, "secondary model");
    require(w.vlm, "vision model");
    auto cfg = role_config(w, role, task, state, emit);
    std::string text = task_text(task, state);
    const auto [dim, intent] = exemplar_tags(task, state);
    if (auto ex = qc::default_exemplars().select(dim, intent)) {
      text += "Plot guidance (" + dim + ", " + intent + "): " + ex->guidance_text + "\n";
    }
    auto record = qc::qc_loop(text, *w.kernel, *w.primary, *w.secondary, *w.vlm, cfg, w.qc);
    for (const auto& it : record.iterations) {
      const sandbox::ArtifactRecord a{it.artifact_path, sandbox::media_type_for(it.artifact_path)};
      state.add_artifact(a);
      memory::update_ledger(state.ledger, a, state.workspace_root);
      state.critiques[it.artifact_path] = it.critique;
      if (emit) {
        emit("figure", sandbox::to_json(a));
        emit("critique", {{"task_id", task.id}, {"path", a.path}, {"critique", qc::to_json(it.critique)}});
      }
    }
    if (record.iterations.empty() || record.failure) {
      return TaskResult{false, "figure generation failed: " + record.failure.value_or("no figure")};
    }
    const auto& last = record.iterations.back();
    return TaskResult{true, last.artifact_path + " scored " +
                                std::to_string(last.critique.composite) + "/10 after " +
                                std::to_string(record.iterations.size()) + " iteration(s)" +
                                (record.accepted ? "" : ", below threshold")};
  };

  out[AgentRole::Search] = [w, emit](const Task& task, AgentRole, SessionState& state) {
    require(w.catalog, "catalog");
    require(w.primary, "primary model");
    auto results = search::agentic_search(task.description, *w.catalog, *w.primary, w.search);
    memory::update_ledger(state.ledger, results);
    if (emit) emit("search_results", {{"task_id", task.id}, {"results", search::to_json(results)}});
    if (results.entries.empty()) return TaskResult{false, "no matching datasets"};
    std::string ids;
    for (const auto& e : results.entries) ids += (ids.empty() ? "" : ", ") + e.dataset_id;
    return TaskResult{true, std::to_string(results.entries.size()) + " datasets: " + ids};
  };

  out[AgentRole::Writer] = [w, emit](const Task&, AgentRole, SessionState& state) {
    require(w.primary, "writer model");
    auto text = synthesize_report(state, *w.primary, w.writer_model);
    if (emit) emit("report", {{"text", text}});
    return TaskResult{true, text};
  };
  return out;
}

// ---- Turn

TurnResult run_turn(const std::string& user_msg, SessionState& state, SupervisorDeps& deps) {
  TurnResult result;
  state.supervisor_turns = 0;
  state.history.push_back(llm::Message::text(llm::Role::User, user_msg));
  try {
    if (!deps.planner) throw Error(ErrorCode::InvalidArgument, "no planner backend");
    plan_decompose(user_msg, state, *deps.planner, deps.planner_model);
    emit(deps, "plan", to_json(state.plan));
  } catch (const Error& e) {
    result.message = e.what();
    emit(deps, "error", {{"message", result.message}});
    emit(deps, "turn_done", {{"outcome", "error"}, {"steps", 0}});
    return result;
  }

  while (true) {
    auto step = supervisor_step(state, deps);
    if (step.kind != StepKind::Dispatched) {
      result.final = step.kind;
      if (step.kind == StepKind::CapExceeded) result.message = step.message;
      break;
    }
    ++result.steps;
    const auto& t = state.plan.get(step.task_id);
    if (t.kind == TaskKind::Synthesis && step.task_ok) result.report = t.result_summary;
  }

  if (result.final == StepKind::CapExceeded) {
    state.history.push_back(llm::Message::text(llm::Role::Assistant, result.message));
    emit(deps, "error", {{"message", result.message}, {"cap", deps.iteration_cap}});
  } else if (deps.auto_report && !result.report && state.plan.count(TaskStatus::Done) > 0) {
    auto it = deps.executors.find(AgentRole::Writer);
    if (it != deps.executors.end() && it->second) {
      Task report;
      report.id = "report";
      report.description = "Summarize the findings";
      report.kind = TaskKind::Synthesis;
      try {
        auto r = it->second(report, AgentRole::Writer, state);
        if (r.ok) result.report = r.summary;
      } catch (const Error& e) {
        emit(deps, "error", {{"message", e.what()}});
      }
    }
  }
  emit(deps, "turn_done",
       {{"outcome", result.final == StepKind::CapExceeded ? "cap_exceeded" : "complete"},
        {"steps", result.steps}});
  return result;
}

}  // namespace geoagent::orchestrator
