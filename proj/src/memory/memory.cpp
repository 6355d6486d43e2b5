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

#include "geoagent/memory/memory.hpp"

#include <cstdio>
#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::memory {

bool StateLedger::empty() const {
  return variables.empty() && dataset_ids.empty() && file_paths.empty() && results.empty();
}

std::vector<std::string> StateLedger::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : variables) out.push_back(k);
  out.insert(out.end(), dataset_ids.begin(), dataset_ids.end());
  out.insert(out.end(), file_paths.begin(), file_paths.end());
  for (const auto& [k, _] : results) out.push_back(k);
  return out;
}

std::string render(const StateLedger& l) {
  std::ostringstream out;
  out << "[ledger]\nvariables:\n";
  for (const auto& [name, hint] : l.variables) {
    out << "  " << name;
    if (!hint.empty()) out << ": " << hint;
    out << "\n";
  }
  out << "dataset_ids:\n";
  for (const auto& id : l.dataset_ids) out << "  " << id << "\n";
  out << "file_paths:\n";
  for (const auto& p : l.file_paths) out << "  " << p << "\n";
  out << "results:\n";
  for (const auto& [label, value] : l.results) out << "  " << label << " = " << value << "\n";
  out << "[/ledger]";
  return out.str();
}

json to_json(const StateLedger& l) {
  return {{"variables", l.variables},
          {"dataset_ids", l.dataset_ids},
          {"file_paths", l.file_paths},
          {"results", l.results}};
}

StateLedger ledger_from_json(const json& v) {
  StateLedger l;
  l.variables = v.value("variables", std::map<std::string, std::string>{});
  l.dataset_ids = v.value("dataset_ids", std::set<std::string>{});
  l.file_paths = v.value("file_paths", std::set<std::string>{});
  l.results = v.value("results", std::map<std::string, std::string>{});
  return l;
}

namespace {

void check_within(const std::filesystem::path& root, const std::string& path) {
  if (!sandbox::path_within(root, path)) {
    throw Error(ErrorCode::IsolationViolation,
                "artifact " + path + " is outside workspace " + root.string());
  }
}

void merge_binding(StateLedger& l, const sandbox::Binding& b) {
  if (b.name.empty()) return;
  auto [it, inserted] = l.variables.emplace(b.name, b.type_hint);
  if (!inserted && !b.type_hint.empty()) it->second = b.type_hint;
}

}  // namespace

void update_ledger(StateLedger& l, const sandbox::ExecutionResult& event,
                   const std::filesystem::path& workspace_root) {
  for (const auto& a : event.new_artifacts) check_within(workspace_root, a.path);
  for (const auto& b : event.declared_bindings) merge_binding(l, b);
  for (const auto& a : event.new_artifacts) l.file_paths.insert(a.path);
}

void update_ledger(StateLedger& l, const search::RankedResults& event) {
  for (const auto& e : event.entries) l.dataset_ids.insert(e.dataset_id);
}

void update_ledger(StateLedger& l, const sandbox::ArtifactRecord& event,
                   const std::filesystem::path& workspace_root) {
  check_within(workspace_root, event.path);
  l.file_paths.insert(event.path);
}

void record_result(StateLedger& l, const std::string& label, const std::string& value) {
  if (label.empty()) throw Error(ErrorCode::InvalidArgument, "empty result label");
  l.results[label] = value.size() > 200 ? value.substr(0, 200) : value;
}

void record_result(StateLedger& l, const std::string& label, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  record_result(l, label, std::string(buf));
}

std::pair<std::vector<Message>, std::vector<Message>> partition(
    const std::vector<Message>& history, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  const std::size_t split = history.size() > k ? history.size() - k : 0;
  return {std::vector<Message>(history.begin(), history.begin() + static_cast<long>(split)),
          std::vector<Message>(history.begin() + static_cast<long>(split), history.end())};
}

CompressedContext compress(const std::vector<Message>& old, const StateLedger& ledger,
                           llm::Backend& backend, const std::string& model_tag,
                           const CompressedContext* previous) {
  if (old.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to compress");
  std::ostringstream prompt;
  prompt << kSummarizeMarker << "\n";
  prompt << "Summarize the conversation below into a short structured summary. Keep every "
            "variable name, dataset identifier, file path and numeric result.\n";
  if (previous) prompt << "\nEarlier summary:\n" << previous->narrative << "\n";
  prompt << "\nMessages:\n";
  for (const auto& m : old) prompt << llm::to_string(m.role) << ": " << m.joined_text() << "\n";

  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.messages = {Message::text(llm::Role::System, "You compress agent conversation history."),
                  Message::text(llm::Role::User, prompt.str())};
  auto reply = llm::complete(req, backend);

  CompressedContext out;
  out.narrative = reply.text;
  while (!out.narrative.empty() && (out.narrative.back() == '\n' || out.narrative.back() == ' ')) {
    out.narrative.pop_back();
  }
  out.ledger_snapshot = ledger;
  out.summary_text = out.narrative + "\n\n" + render(ledger);
  out.covered_message_count = old.size() + (previous ? previous->covered_message_count : 0);
  return out;
}

int message_tokens(const Message& m) { return llm::estimate_tokens(m.joined_text()); }

PromptContext build_context(const std::optional<CompressedContext>& compressed,
                            const std::vector<Message>& recent, int budget_tokens,
                            const StateLedger* ledger) {
  if (budget_tokens <= 0) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
  std::optional<Message> narrative;
  if (compressed && !compressed->narrative.empty()) {
    narrative = Message::text(llm::Role::System,
                              "Summary of earlier conversation:\n" + compressed->narrative);
  }
  std::optional<Message> block;
  if (ledger) {
    block = Message::text(llm::Role::System, render(*ledger));
  } else if (compressed) {
    block = Message::text(llm::Role::System, render(compressed->ledger_snapshot));
  }

  const int narrative_tokens = narrative ? message_tokens(*narrative) : 0;
  const int block_tokens = block ? message_tokens(*block) : 0;
  std::vector<int> costs;
  int recent_tokens = 0;
  for (const auto& m : recent) {
    costs.push_back(message_tokens(m));
    recent_tokens += costs.back();
  }

  PromptContext out;
  std::size_t first = 0;
  int total = narrative_tokens + block_tokens + recent_tokens;
  while (total > budget_tokens && first + 1 < recent.size()) {
    total -= costs[first++];
  }
  if (total > budget_tokens && narrative) {
    total -= narrative_tokens;
    narrative.reset();
    out.narrative_dropped = true;
  }
  if (total > budget_tokens) {
    throw Error(ErrorCode::BudgetTooSmall,
                "ledger block and last message need " + std::to_string(total) +
                    " tokens, budget is " + std::to_string(budget_tokens));
  }
  if (narrative) out.messages.push_back(*narrative);
  if (block) out.messages.push_back(*block);
  out.messages.insert(out.messages.end(), recent.begin() + static_cast<long>(first), recent.end());
  out.tokens = total;
  out.dropped_recent = first;
  return out;
}

ConversationMemory::ConversationMemory(llm::BackendHandle backend, std::string model_tag,
                                       std::size_t k)
    : backend_(std::move(backend)), model_tag_(std::move(model_tag)), k_(k) {
  if (k_ == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
}

void ConversationMemory::append(Message m) { history_.push_back(std::move(m)); }

bool ConversationMemory::maybe_compress() {
  const std::size_t covered = compressed_ ? compressed_->covered_message_count : 0;
  const std::size_t uncovered = history_.size() - covered;
  if (uncovered <= 2 * k_) return false;
  std::vector<Message> tail(history_.begin() + static_cast<long>(covered), history_.end());
  auto [old, recent] = partition(tail, k_);
  compressed_ = compress(old, ledger_, *backend_, model_tag_, compressed_ ? &*compressed_ : nullptr);
  ++compressions_;
  return true;
}

PromptContext ConversationMemory::context(int budget_tokens) {
  maybe_compress();
  const std::size_t covered = compressed_ ? compressed_->covered_message_count : 0;
  std::vector<Message> recent(history_.begin() + static_cast<long>(covered), history_.end());
  return build_context(compressed_, recent, budget_tokens, &ledger_);
}

}  // namespace geoagent::memory
