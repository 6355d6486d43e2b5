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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geoagent/catalog/catalog.hpp"
#include "geoagent/llm/gateway.hpp"
#include "geoagent/memory/memory.hpp"
#include "geoagent/qc/qc.hpp"
#include "geoagent/sandbox/repair.hpp"
#include "geoagent/search/search.hpp"

namespace geoagent::orchestrator {

using nlohmann::json;

inline constexpr int kDefaultIterationCap = 20;
inline constexpr int kTaxonomicMinimum = 3;

inline constexpr const char* kPlanMarker = "Stage: plan";
inline constexpr const char* kReviseMarker = "Stage: revise";
inline constexpr const char* kReportMarker = "Stage: report";

enum class AgentRole { Supervisor, Oceanographer, Ecologist, Visualization, DataFrame, Writer, Search, Wise };
enum class TaskKind { Analysis, Visualization, Retrieval, Synthesis };
enum class TaskStatus { Pending, Running, Done, Failed };

std::string_view to_string(AgentRole role);
AgentRole role_from_string(std::string_view text);
std::string_view to_string(TaskKind kind);
TaskKind kind_from_string(std::string_view text);
std::string_view to_string(TaskStatus status);

struct Task {
  std::string id;
  std::string description;
  std::vector<std::string> dataset_refs;
  TaskKind kind = TaskKind::Analysis;
  TaskStatus status = TaskStatus::Pending;
  bool external_retrieval = false;  // planner flag: fetch an external field, not the archive
  std::vector<std::string> artifact_refs;
  std::optional<AgentRole> preferred_role;
  bool from_revision = false;
  std::string result_summary;
};

/// Ordered tasks; every mutation bumps `revision`. Illegal status moves and
/// a second running task throw InvalidArgument.
class Plan {
 public:
  const std::vector<Task>& tasks() const { return tasks_; }
  int revision() const { return revision_; }

  void replace(std::vector<Task> tasks);
  /// Inserts after task `after_id` (at the end when absent).
  void insert_after(const std::string& after_id, std::vector<Task> tasks);
  void start(const std::string& id);
  void finish(const std::string& id, bool ok, std::string summary = {});

  const Task* next_pending() const;
  const Task& get(const std::string& id) const;
  std::size_t running() const;
  std::size_t count(TaskStatus status) const;

 private:
  Task& at(const std::string& id);

  std::vector<Task> tasks_;
  int revision_ = 0;
};

json to_json(const Task& t);
json to_json(const Plan& p);

/// Routing inputs for one dataset reference.
struct RefProfile {
  catalog::FeatureFlags flags;
  bool taxonomic = false;
};

const std::set<std::string>& default_taxa_lexicon();
/// At least `minimum` parameter names contain a lexicon term
/// (case-insensitive).
bool is_taxonomic(const catalog::DatasetMetadata& meta, const std::set<std::string>& lexicon,
                  int minimum = kTaxonomicMinimum);
RefProfile profile_for(const catalog::DatasetMetadata& meta,
                       const std::set<std::string>& lexicon = default_taxa_lexicon());

/// Deterministic table; kind dominates modality. Throws UnresolvedRef.
AgentRole route(const Task& task, const std::map<std::string, RefProfile>& profiles);

/// Violation text, or nullopt when the pairing is allowed.
std::optional<std::string> enforce_role_constraints(
    const Task& task, AgentRole role, const std::map<std::string, RefProfile>& profiles);

struct LoadedDataset {
  std::filesystem::path workspace_path;
  RefProfile profile;
};

struct SessionState {
  std::string session_id;
  std::filesystem::path workspace_root;
  std::vector<llm::Message> history;
  memory::StateLedger ledger;
  Plan plan;
  std::map<std::string, LoadedDataset> loaded;
  std::vector<sandbox::ArtifactRecord> artifacts;
  std::map<std::string, qc::Critique> critiques;  // artifact path -> last critique
  int supervisor_turns = 0;
  int next_task_number = 1;

  std::map<std::string, RefProfile> profiles() const;
  /// Appends after checking the path lies in the workspace; throws
  /// IsolationViolation otherwise.
  void add_artifact(const sandbox::ArtifactRecord& a);
};

/// (kind, payload) pairs for the session event log.
using EventSink = std::function<void(const std::string& kind, const json& payload)>;

/// Schema-constrained planner call. The new tasks replace the plan.
/// Throws InvalidArgument for an empty message and SchemaViolation for an
/// empty or malformed plan.
Plan& plan_decompose(const std::string& user_msg, SessionState& state, llm::Backend& planner,
                     const std::string& model_tag = "planner");

const json& plan_schema();

/// Report prompt carries the ledger, done-task summaries, artifacts and
/// their critiques; image artifacts ride along as vision parts when the
/// model accepts them. The narrative is appended to the history. Throws
/// InvalidArgument when no task is done.
std::string synthesize_report(SessionState& state, llm::Backend& backend,
                              const std::string& model_tag = "writer");

struct TaskResult {
  bool ok = false;
  std::string summary;
};

using Executor = std::function<TaskResult(const Task& task, AgentRole role, SessionState& state)>;

/// What the built-in executors need. Pointers are borrowed.
struct Workers {
  const catalog::Catalog* catalog = nullptr;
  llm::Backend* primary = nullptr;
  llm::Backend* secondary = nullptr;
  llm::Backend* vlm = nullptr;
  sandbox::KernelHandle* kernel = nullptr;
  sandbox::RepairConfig repair;
  search::SearchConfig search;
  qc::QcConfig qc;
  std::string writer_model = "writer";
};

std::string role_prompt(AgentRole role);

/// Coding roles run the repair loop, Visualization the QC loop, Search the
/// agentic search and Writer the report.
std::map<AgentRole, Executor> default_executors(const Workers& workers, EventSink emit = {});

struct SupervisorDeps {
  llm::Backend* planner = nullptr;
  std::string planner_model = "planner";
  const catalog::Catalog* catalog = nullptr;
  std::map<AgentRole, Executor> executors;
  EventSink emit;
  int iteration_cap = kDefaultIterationCap;
  std::set<std::string> taxa_lexicon = default_taxa_lexicon();
  /// Writer call after the plan drains when no synthesis task ran.
  bool auto_report = true;
};

enum class StepKind { Dispatched, TurnComplete, CapExceeded };

struct StepOutcome {
  StepKind kind = StepKind::TurnComplete;
  std::string task_id;
  std::optional<AgentRole> role;
  bool task_ok = false;
  std::string message;
};

/// One supervisor turn: first pending task -> resolve refs -> route ->
/// constraints -> executor. A failed task gets one planner revision.
StepOutcome supervisor_step(SessionState& state, SupervisorDeps& deps);

struct TurnResult {
  StepKind final = StepKind::TurnComplete;
  int steps = 0;
  std::optional<std::string> report;
  std::string message;
};

/// Plans the message and steps until the plan drains or the cap hits.
/// supervisor_turns restarts at 0 for every user message.
TurnResult run_turn(const std::string& user_msg, SessionState& state, SupervisorDeps& deps);

}  // namespace geoagent::orchestrator
