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

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geoagent/llm/gateway.hpp"

namespace geoagent::llm {

/// One entry of a scripted backend. A rule matches when every string in
/// `contains` occurs in the request text (restricted to messages of `role`
/// when set).
struct ScriptRule {
  std::vector<std::string> contains;
  std::optional<Role> role;
  ChatResponse response;
  bool consume_once = false;
};

/// Deterministic test double: rules are tried in registration order and the
/// first live match wins.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;

  void add_rule(ScriptRule rule);
  void add_rule(std::vector<std::string> contains, std::string text,
                bool consume_once = false);
  void add_structured_rule(std::vector<std::string> contains, json structured,
                           bool consume_once = false);

  /// Loads a JSON array of {contains, role?, response{text, structured?},
  /// consume_once?} objects.
  void load_rules(const json& rules);
  void load_rules_file(const std::filesystem::path& path);

  /// Model tags that accept image parts. Empty means every tag does.
  void set_vision_models(std::set<std::string> tags);

  ChatResponse send(const ChatRequest& request) override;
  bool supports_vision(std::string_view model_tag) const override;
  std::string provider_id() const override { return "scripted"; }

  /// Every request seen, in arrival order.
  std::vector<ChatRequest> requests() const;
  std::size_t request_count() const;

 private:
  struct Slot {
    ScriptRule rule;
    bool consumed = false;
  };

  mutable std::mutex mu_;
  std::vector<Slot> rules_;
  std::vector<ChatRequest> log_;
  std::set<std::string> vision_models_;
};

/// Wraps another backend and appends every exchange to a cassette file:
/// one JSON object per line, {digest, request_summary, response}.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(BackendHandle inner, std::filesystem::path cassette);

  ChatResponse send(const ChatRequest& request) override;
  bool supports_vision(std::string_view model_tag) const override;
  std::string provider_id() const override { return inner_->provider_id(); }

 private:
  BackendHandle inner_;
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

/// Serves responses from a cassette. Repeated digests are served in recorded
/// order; once a digest's queue is down to one entry that entry repeats.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::filesystem::path& cassette);

  ChatResponse send(const ChatRequest& request) override;
  bool supports_vision(std::string_view) const override { return true; }
  std::string provider_id() const override { return "replay"; }

 private:
  std::mutex mu_;
  std::map<std::string, std::deque<ChatResponse>> entries_;
};

/// Connection settings for an OpenAI-compatible chat endpoint.
struct ProviderConfig {
  std::string base_url;         // e.g. "http://127.0.0.1:8080"
  std::string path = "/v1/chat/completions";
  std::string key_env;          // GATEWAY_PRIMARY_KEY or GATEWAY_SECONDARY_KEY
  std::set<std::string> vision_models;
  int timeout_s = 120;
};

/// Calls a remote provider over HTTP. Connection failures and non-2xx
/// replies surface as ProviderUnreachable.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(ProviderConfig config);

  ChatResponse send(const ChatRequest& request) override;
  bool supports_vision(std::string_view model_tag) const override;
  std::string provider_id() const override { return "http:" + config_.base_url; }

 private:
  ProviderConfig config_;
};

/// Builds a backend from a config object of the form
///   {"kind": "scripted", "script": FILE}
///   {"kind": "replay", "cassette": FILE}
///   {"kind": "record", "cassette": FILE, "inner": {...}}
///   {"kind": "http", "base_url": URL, "key_env": NAME, "vision_models": [...]}
/// Relative paths resolve against `base_dir`.
BackendHandle make_backend(const json& config, const std::filesystem::path& base_dir);

}  // namespace geoagent::llm
