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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geoagent/llm/gateway.hpp"
#include "geoagent/sandbox/kernel.hpp"

namespace geoagent::sandbox {

inline constexpr int kDefaultRepairBudget = 3;

inline constexpr const char* kGenerateMarker = "Stage: generate";
inline constexpr const char* kRepairMarker = "Stage: repair";
inline constexpr const char* kEscalateMarker = "Stage: escalate";

struct RepairAttempt {
  std::string code;   // empty when the reply carried no fenced block
  std::string reply;  // raw model text
  ExecutionResult result;
  std::optional<std::string> critique;
};

struct RepairContext {
  std::string task_description;
  std::vector<RepairAttempt> attempts;
  int budget_remaining = 0;
};

enum class OutcomeKind { Success, Escalated, Failed };

std::string_view to_string(OutcomeKind kind);

struct RepairOutcome {
  OutcomeKind kind = OutcomeKind::Failed;
  std::optional<ExecutionResult> result;  // last execution, when there was one
  RepairContext context;
  int executions = 0;
  bool escalated = false;
  std::optional<std::string> error;  // gateway or kernel failure
};

struct RepairConfig {
  std::string role = "DataFrame";
  std::string system_prompt;  // empty: a generic role prompt
  std::string primary_model = "primary";
  std::string secondary_model = "secondary";
  int budget = kDefaultRepairBudget;
  double timeout_s = kDefaultTimeoutS;
  std::string context_block;  // state ledger, placed in every prompt
  std::function<void(const RepairAttempt&)> on_attempt;  // after every attempt
};

/// Body of the first fenced code block (``` or ```lang), nullopt when there
/// is none.
std::optional<std::string> extract_code(std::string_view reply);

llm::ChatRequest generation_request(const std::string& task, const RepairConfig& config);
/// Task, ledger and the last attempt only.
llm::ChatRequest repair_request(const RepairContext& ctx, const RepairConfig& config);
/// Every attempt's code and rendered traceback, verbatim.
llm::ChatRequest escalation_request(const RepairContext& ctx, const RepairConfig& config);

struct Escalation {
  std::string code;
  ExecutionResult result;
};

/// One secondary-model generation and one execution. The attempt is
/// appended to `ctx`. Throws InvalidArgument on an empty context.
Escalation escalate(RepairContext& ctx, llm::Backend& secondary, KernelHandle& kernel,
                    const RepairConfig& config);

/// generate -> execute -> feed the traceback back, up to `budget` attempts;
/// then one escalation. Gateway and kernel errors end in a Failed outcome
/// carrying the context so far.
RepairOutcome repair_loop(const std::string& task, KernelHandle& kernel, llm::Backend& primary,
                          llm::Backend& secondary, const RepairConfig& config = {});

}  // namespace geoagent::sandbox
