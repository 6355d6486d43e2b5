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

#include "geoagent/sandbox/repair.hpp"

#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::sandbox {

using llm::Message;
using llm::Role;

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Success: return "success";
    case OutcomeKind::Escalated: return "escalated";
    case OutcomeKind::Failed: return "failed";
  }
  return "failed";
}

std::optional<std::string> extract_code(std::string_view reply) {
  const auto open = reply.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body = reply.find('\n', open);
  if (body == std::string_view::npos) return std::nullopt;
  ++body;
  const auto close = reply.find("```", body);
  if (close == std::string_view::npos) return std::nullopt;
  std::string code(reply.substr(body, close - body));
  while (!code.empty() && code.back() == '\n') code.pop_back();
  return code;
}

namespace {

std::string system_text(const RepairConfig& config) {
  if (!config.system_prompt.empty()) return config.system_prompt;
  return "You are the " + config.role +
         " agent. Answer with one fenced python code block that runs in the session kernel.";
}

void append_context(std::ostringstream& out, const std::string& task, const RepairConfig& config) {
  out << "Task:\n" << task << "\n";
  if (!config.context_block.empty()) out << "\n" << config.context_block << "\n";
}

std::string traceback_text(const ExecutionResult& r) {
  return r.traceback ? render_traceback(*r.traceback) : std::string{};
}

llm::ChatRequest make_request(const std::string& model, std::string system, std::string user) {
  llm::ChatRequest req;
  req.model_tag = model;
  req.messages = {Message::text(Role::System, std::move(system)),
                  Message::text(Role::User, std::move(user))};
  return req;
}

RepairAttempt run_attempt(const std::string& reply, KernelHandle& kernel, double timeout_s,
                          int& executions) {
  RepairAttempt a;
  a.reply = reply;
  auto code = extract_code(reply);
  if (!code) {
    a.result = ExecutionResult::failure("NoCode", "reply contained no fenced code block");
    return a;
  }
  a.code = *code;
  ++executions;
  a.result = kernel.execute(a.code, timeout_s);
  return a;
}

}  // namespace

llm::ChatRequest generation_request(const std::string& task, const RepairConfig& config) {
  std::ostringstream out;
  out << kGenerateMarker << "\n";
  append_context(out, task, config);
  return make_request(config.primary_model, system_text(config), out.str());
}

llm::ChatRequest repair_request(const RepairContext& ctx, const RepairConfig& config) {
  if (ctx.attempts.empty()) throw Error(ErrorCode::InvalidArgument, "no attempt to repair");
  const auto& last = ctx.attempts.back();
  std::ostringstream out;
  out << kRepairMarker << "\n";
  append_context(out, ctx.task_description, config);
  if (last.code.empty()) {
    out << "\nPrevious reply:\n" << last.reply << "\n";
  } else {
    out << "\nPrevious code:\n```python\n" << last.code << "\n```\n";
  }
  out << "\nTraceback:\n" << traceback_text(last.result);
  out << "\nFix the error and answer with the corrected code block.\n";
  return make_request(config.primary_model, system_text(config), out.str());
}

llm::ChatRequest escalation_request(const RepairContext& ctx, const RepairConfig& config) {
  if (ctx.attempts.empty()) {
    throw Error(ErrorCode::InvalidArgument, "escalation needs at least one prior attempt");
  }
  std::ostringstream out;
  out << kEscalateMarker << "\n";
  out << "The " << config.role << " agent could not finish this task after "
      << ctx.attempts.size() << " attempts.\n";
  append_context(out, ctx.task_description, config);
  for (std::size_t i = 0; i < ctx.attempts.size(); ++i) {
    const auto& a = ctx.attempts[i];
    out << "\nAttempt " << (i + 1) << ":\n";
    if (a.code.empty()) {
      out << "Reply:\n" << a.reply << "\n";
    } else {
      out << "Code:\n```python\n" << a.code << "\n```\n";
    }
    out << "Traceback:\n" << traceback_text(a.result);
    if (a.critique) out << "Critique:\n" << *a.critique << "\n";
  }
  out << "\nWrite a working solution as one fenced python code block.\n";
  return make_request(config.secondary_model,
                      "You are the senior reviewing agent. Diagnose the repeated failures.",
                      out.str());
}

Escalation escalate(RepairContext& ctx, llm::Backend& secondary, KernelHandle& kernel,
                    const RepairConfig& config) {
  const auto reply = llm::complete(escalation_request(ctx, config), secondary);
  int executions = 0;
  RepairAttempt a = run_attempt(reply.text, kernel, config.timeout_s, executions);
  ctx.attempts.push_back(a);
  if (config.on_attempt) config.on_attempt(a);
  return Escalation{a.code, a.result};
}

RepairOutcome repair_loop(const std::string& task, KernelHandle& kernel, llm::Backend& primary,
                          llm::Backend& secondary, const RepairConfig& config) {
  if (config.budget < 1) throw Error(ErrorCode::InvalidArgument, "repair budget must be >= 1");
  RepairOutcome out;
  out.context.task_description = task;
  out.context.budget_remaining = config.budget;
  auto& ctx = out.context;
  try {
    while (ctx.budget_remaining > 0) {
      const auto request =
          ctx.attempts.empty() ? generation_request(task, config) : repair_request(ctx, config);
      const auto reply = llm::complete(request, primary);
      ctx.attempts.push_back(run_attempt(reply.text, kernel, config.timeout_s, out.executions));
      --ctx.budget_remaining;
      if (config.on_attempt) config.on_attempt(ctx.attempts.back());
      const auto& r = ctx.attempts.back().result;
      if (!ctx.attempts.back().code.empty()) out.result = r;
      if (r.ok()) {
        out.kind = OutcomeKind::Success;
        return out;
      }
    }
    out.escalated = true;
    const auto before = out.executions;
    auto esc = escalate(ctx, secondary, kernel, config);
    if (!esc.code.empty()) {
      out.executions = before + 1;
      out.result = esc.result;
    }
    out.kind = esc.result.ok() ? OutcomeKind::Escalated : OutcomeKind::Failed;
  } catch (const Error& e) {
    out.kind = OutcomeKind::Failed;
    out.error = e.what();
  }
  return out;
}

}  // namespace geoagent::sandbox
