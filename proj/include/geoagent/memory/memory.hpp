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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geoagent/llm/gateway.hpp"
#include "geoagent/sandbox/types.hpp"
#include "geoagent/search/search.hpp"

namespace geoagent::memory {

using llm::Message;
using nlohmann::json;

inline constexpr std::size_t kRecentMessages = 10;
inline constexpr const char* kSummarizeMarker = "Stage: summarize";

/// Operational state that summarization must never lose. Append/update only.
struct StateLedger {
  std::map<std::string, std::string> variables;  // name -> type hint
  std::set<std::string> dataset_ids;
  std::set<std::string> file_paths;
  std::map<std::string, std::string> results;  // label -> short value

  bool empty() const;
  /// Every name, id, path and label, each of which appears verbatim in
  /// render().
  std::vector<std::string> keys() const;

  friend bool operator==(const StateLedger&, const StateLedger&) = default;
};

/// Deterministic block, sorted, with every section header present:
///
///   [ledger]
///   variables:
///     mean_speed: float
///   dataset_ids:
///   file_paths:
///   results:
///     bias = 0.12
///   [/ledger]
std::string render(const StateLedger& ledger);

json to_json(const StateLedger& ledger);
StateLedger ledger_from_json(const json& value);

/// Bindings become variables (a non-empty type hint replaces the old one);
/// artifacts become file paths. Throws IsolationViolation, leaving the
/// ledger unchanged, when an artifact lies outside `workspace_root`.
void update_ledger(StateLedger& ledger, const sandbox::ExecutionResult& event,
                   const std::filesystem::path& workspace_root);
void update_ledger(StateLedger& ledger, const search::RankedResults& event);
void update_ledger(StateLedger& ledger, const sandbox::ArtifactRecord& event,
                   const std::filesystem::path& workspace_root);
/// Long strings are cut to 200 bytes.
void record_result(StateLedger& ledger, const std::string& label, const std::string& value);
void record_result(StateLedger& ledger, const std::string& label, double value);

/// Recent = the last K messages, old = the rest. Throws InvalidArgument when
/// K is 0.
std::pair<std::vector<Message>, std::vector<Message>> partition(
    const std::vector<Message>& history, std::size_t k);

struct CompressedContext {
  std::string narrative;     // model output
  std::string summary_text;  // narrative + "\n\n" + render(ledger_snapshot)
  std::size_t covered_message_count = 0;
  StateLedger ledger_snapshot;
};

/// Summarizes `old` with the fast model. A previous summary, when given, is
/// folded into the prompt and its coverage carried forward. Throws
/// InvalidArgument when `old` is empty.
CompressedContext compress(const std::vector<Message>& old, const StateLedger& ledger,
                           llm::Backend& backend, const std::string& model_tag,
                           const CompressedContext* previous = nullptr);

struct PromptContext {
  std::vector<Message> messages;
  int tokens = 0;
  std::size_t dropped_recent = 0;
  bool narrative_dropped = false;
};

int message_tokens(const Message& m);

/// Emits [summary?, ledger, recent...]. Over budget: the oldest recent
/// messages go first (never the last one), then the summary narrative. The
/// ledger block is never trimmed; `ledger` wins over the compressed snapshot
/// when both are given. Throws BudgetTooSmall when the ledger block and the
/// last message alone exceed the budget, InvalidArgument when budget <= 0.
PromptContext build_context(const std::optional<CompressedContext>& compressed,
                            const std::vector<Message>& recent, int budget_tokens,
                            const StateLedger* ledger = nullptr);

/// Per-session history with the summarization trigger: compress once the
/// uncovered history exceeds 2K messages.
class ConversationMemory {
 public:
  ConversationMemory(llm::BackendHandle backend, std::string model_tag,
                     std::size_t k = kRecentMessages);

  void append(Message m);
  StateLedger& ledger() { return ledger_; }
  const StateLedger& ledger() const { return ledger_; }
  const std::vector<Message>& history() const { return history_; }
  const std::optional<CompressedContext>& compressed() const { return compressed_; }
  int compressions() const { return compressions_; }

  /// Compresses when the trigger fires. Returns whether it did.
  bool maybe_compress();
  PromptContext context(int budget_tokens);

 private:
  llm::BackendHandle backend_;
  std::string model_tag_;
  std::size_t k_;
  std::vector<Message> history_;
  StateLedger ledger_;
  std::optional<CompressedContext> compressed_;
  int compressions_ = 0;
};

}  // namespace geoagent::memory
