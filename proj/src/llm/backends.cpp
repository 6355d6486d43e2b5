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

#include "geoagent/llm/backends.hpp"

#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::llm {

namespace {

std::string role_text(const ChatRequest& request, std::optional<Role> role) {
  if (!role) return request.full_text();
  std::string out;
  for (const auto& message : request.messages) {
    if (message.role != *role) continue;
    if (!out.empty()) out += '\n';
    out += message.joined_text();
  }
  return out;
}

bool rule_matches(const ScriptRule& rule, const ChatRequest& request) {
  const std::string haystack = role_text(request, rule.role);
  for (const auto& needle : rule.contains) {
    if (haystack.find(needle) == std::string::npos) return false;
  }
  return true;
}

std::string summarize(const ChatRequest& request) {
  std::string last_user;
  for (const auto& message : request.messages) {
    if (message.role == Role::User) last_user = message.joined_text();
  }
  if (last_user.size() > 160) last_user = last_user.substr(0, 160) + "...";
  return request.model_tag + " | " + last_user;
}

}  // namespace

void ScriptedBackend::add_rule(ScriptRule rule) {
  std::lock_guard lock(mu_);
  rules_.push_back(Slot{std::move(rule)});
}

void ScriptedBackend::add_rule(std::vector<std::string> contains, std::string text,
                               bool consume_once) {
  ScriptRule rule;
  rule.contains = std::move(contains);
  rule.response.text = std::move(text);
  rule.consume_once = consume_once;
  add_rule(std::move(rule));
}

void ScriptedBackend::add_structured_rule(std::vector<std::string> contains,
                                          json structured, bool consume_once) {
  ScriptRule rule;
  rule.contains = std::move(contains);
  rule.response.text = structured.dump();
  rule.response.structured = std::move(structured);
  rule.consume_once = consume_once;
  add_rule(std::move(rule));
}

void ScriptedBackend::load_rules(const json& rules) {
  if (!rules.is_array()) {
    throw Error(ErrorCode::ParseError, "script must be a JSON array of rules");
  }
  for (const auto& entry : rules) {
    ScriptRule rule;
    rule.contains = entry.at("contains").get<std::vector<std::string>>();
    if (auto it = entry.find("role"); it != entry.end()) {
      rule.role = role_from_string(it->get<std::string>());
    }
    const auto& response = entry.at("response");
    rule.response = response_from_json(response);
    if (rule.response.structured && rule.response.text.empty()) {
      rule.response.text = rule.response.structured->dump();
    }
    rule.consume_once = entry.value("consume_once", false);
    add_rule(std::move(rule));
  }
}

void ScriptedBackend::load_rules_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open script " + path.string());
  json rules = json::parse(in, nullptr, false);
  if (rules.is_discarded()) {
    throw Error(ErrorCode::ParseError, "script " + path.string() + " is not valid JSON");
  }
  load_rules(rules);
}

void ScriptedBackend::set_vision_models(std::set<std::string> tags) {
  std::lock_guard lock(mu_);
  vision_models_ = std::move(tags);
}

bool ScriptedBackend::supports_vision(std::string_view model_tag) const {
  std::lock_guard lock(mu_);
  return vision_models_.empty() || vision_models_.count(std::string(model_tag)) > 0;
}

ChatResponse ScriptedBackend::send(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  log_.push_back(request);
  for (auto& slot : rules_) {
    if (slot.consumed || !rule_matches(slot.rule, request)) continue;
    if (slot.rule.consume_once) slot.consumed = true;
    ChatResponse response = slot.rule.response;
    response.provider_id = "scripted";
    if (response.usage == Usage{}) {
      response.usage.input_tokens = estimate_tokens(request.full_text());
      response.usage.output_tokens = estimate_tokens(response.text);
    }
    return response;
  }
  std::string text = request.full_text();
  if (text.size() > 240) text = text.substr(text.size() - 240);
  throw Error(ErrorCode::NoMatchingScript, "no scripted rule matched request ending: " + text);
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ScriptedBackend::request_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

RecordingBackend::RecordingBackend(BackendHandle inner, std::filesystem::path cassette)
    : inner_(std::move(inner)), path_(std::move(cassette)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  out_.open(path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::IoError, "cannot open cassette " + path_.string());
}

bool RecordingBackend::supports_vision(std::string_view model_tag) const {
  return inner_->supports_vision(model_tag);
}

ChatResponse RecordingBackend::send(const ChatRequest& request) {
  ChatResponse response = inner_->send(request);
  json record = {{"digest", digest(request)},
                 {"request_summary", summarize(request)},
                 {"response", to_json(response)}};
  std::lock_guard lock(mu_);
  out_ << record.dump() << '\n';
  out_.flush();
  return response;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& cassette) {
  std::ifstream in(cassette);
  if (!in) throw Error(ErrorCode::IoError, "cannot open cassette " + cassette.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("digest") || !record.contains("response")) {
      throw Error(ErrorCode::ParseError, cassette.string() + ":" + std::to_string(line_no) +
                                             ": malformed cassette record");
    }
    entries_[record["digest"].get<std::string>()].push_back(
        response_from_json(record["response"]));
  }
}

ChatResponse ReplayBackend::send(const ChatRequest& request) {
  const std::string key = digest(request);
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.empty()) {
    throw Error(ErrorCode::ProviderUnreachable, "cassette has no entry for digest " + key);
  }
  ChatResponse response = it->second.front();
  if (it->second.size() > 1) it->second.pop_front();
  return response;
}

BackendHandle make_backend(const json& config, const std::filesystem::path& base_dir) {
  const std::string kind = config.value("kind", std::string{});
  auto resolve = [&](const std::string& key) {
    std::filesystem::path p = config.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  if (kind == "scripted") {
    auto backend = std::make_shared<ScriptedBackend>();
    if (config.contains("script")) backend->load_rules_file(resolve("script"));
    if (config.contains("rules")) backend->load_rules(config["rules"]);
    if (config.contains("vision_models")) {
      backend->set_vision_models(config["vision_models"].get<std::set<std::string>>());
    }
    return backend;
  }
  if (kind == "replay") return std::make_shared<ReplayBackend>(resolve("cassette"));
  if (kind == "record") {
    return std::make_shared<RecordingBackend>(make_backend(config.at("inner"), base_dir),
                                              resolve("cassette"));
  }
  if (kind == "http") {
    ProviderConfig provider;
    provider.base_url = config.at("base_url").get<std::string>();
    provider.path = config.value("path", provider.path);
    provider.key_env = config.value("key_env", std::string{"GATEWAY_PRIMARY_KEY"});
    provider.timeout_s = config.value("timeout_s", provider.timeout_s);
    if (config.contains("vision_models")) {
      provider.vision_models = config["vision_models"].get<std::set<std::string>>();
    }
    return std::make_shared<HttpBackend>(std::move(provider));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown backend kind '" + kind + "'");
}

}  // namespace geoagent::llm
