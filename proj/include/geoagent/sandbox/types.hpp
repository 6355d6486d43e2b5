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
#include <optional>
#include <string>
#include <vector>

#include "geoagent/time.hpp"
#include "json.hpp"

namespace geoagent::sandbox {

using nlohmann::json;

struct Frame {
  std::string file;
  int line = 0;
  std::string code_line;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Traceback {
  std::string exception_type;
  std::string message;
  std::vector<Frame> frames;

  friend bool operator==(const Traceback&, const Traceback&) = default;
};

/// Python-style rendering; the exact bytes a repair or escalation prompt
/// embeds.
std::string render_traceback(const Traceback& tb);

struct ArtifactRecord {
  std::string path;  // absolute, under the session workspace
  std::string media_type;

  friend bool operator==(const ArtifactRecord&, const ArtifactRecord&) = default;
};

/// Media type from the file extension; "application/octet-stream" when
/// unknown.
std::string media_type_for(const std::filesystem::path& path);
bool is_image_media_type(const std::string& media_type);

struct Binding {
  std::string name;
  std::string type_hint;

  friend bool operator==(const Binding&, const Binding&) = default;
};

enum class ExecStatus { Ok, Error };

struct ExecutionResult {
  ExecStatus status = ExecStatus::Ok;
  std::string stdout_text;
  std::string stderr_text;
  std::optional<Traceback> traceback;  // present iff status == Error
  std::vector<ArtifactRecord> new_artifacts;
  std::vector<Binding> declared_bindings;
  long duration_ms = 0;

  bool ok() const { return status == ExecStatus::Ok; }

  static ExecutionResult failure(std::string exception_type, std::string message);

  friend bool operator==(const ExecutionResult&, const ExecutionResult&) = default;
};

json to_json(const Traceback& tb);
Traceback traceback_from_json(const json& value);
json to_json(const ArtifactRecord& a);
json to_json(const ExecutionResult& r);
ExecutionResult result_from_json(const json& value);

struct Workspace {
  std::string session_id;
  std::filesystem::path root_path;
  Instant created_at;
};

/// Random version-4 UUID in canonical lower-case form.
std::string new_uuid();

/// Creates <root_dir>/<uuid>. Throws SpawnFailure when the directory cannot
/// be created.
Workspace create_workspace(const std::filesystem::path& root_dir);
Workspace create_workspace(const std::filesystem::path& root_dir, const std::string& session_id);

/// Lexical containment after normalization; `..` escapes are rejected.
bool path_within(const std::filesystem::path& root, const std::filesystem::path& candidate);

}  // namespace geoagent::sandbox
