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

#include "geoagent/sandbox/types.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::sandbox {

std::string render_traceback(const Traceback& tb) {
  std::ostringstream out;
  out << "Traceback (most recent call last):\n";
  for (const auto& f : tb.frames) {
    out << "  File \"" << f.file << "\", line " << f.line << "\n";
    if (!f.code_line.empty()) out << "    " << f.code_line << "\n";
  }
  out << tb.exception_type;
  if (!tb.message.empty()) out << ": " << tb.message;
  out << "\n";
  return out.str();
}

std::string media_type_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".csv") return "text/csv";
  if (ext == ".txt" || ext == ".log") return "text/plain";
  if (ext == ".json") return "application/json";
  if (ext == ".nc") return "application/x-netcdf";
  if (ext == ".py") return "text/x-python";
  if (ext == ".md") return "text/markdown";
  if (ext == ".html") return "text/html";
  return "application/octet-stream";
}

bool is_image_media_type(const std::string& media_type) {
  return media_type == "image/png" || media_type == "image/jpeg" ||
         media_type == "image/svg+xml";
}

ExecutionResult ExecutionResult::failure(std::string exception_type, std::string message) {
  ExecutionResult r;
  r.status = ExecStatus::Error;
  r.traceback = Traceback{std::move(exception_type), std::move(message), {}};
  return r;
}

json to_json(const Traceback& tb) {
  json frames = json::array();
  for (const auto& f : tb.frames) {
    frames.push_back({{"file", f.file}, {"line", f.line}, {"code_line", f.code_line}});
  }
  return {{"exception_type", tb.exception_type}, {"message", tb.message}, {"frames", frames}};
}

Traceback traceback_from_json(const json& v) {
  Traceback tb;
  tb.exception_type = v.value("exception_type", std::string{"Error"});
  tb.message = v.value("message", std::string{});
  if (v.contains("frames")) {
    for (const auto& f : v.at("frames")) {
      tb.frames.push_back({f.value("file", std::string{}), f.value("line", 0),
                           f.value("code_line", std::string{})});
    }
  }
  return tb;
}

json to_json(const ArtifactRecord& a) { return {{"path", a.path}, {"media_type", a.media_type}}; }

json to_json(const ExecutionResult& r) {
  json artifacts = json::array();
  for (const auto& a : r.new_artifacts) artifacts.push_back(to_json(a));
  json bindings = json::array();
  for (const auto& b : r.declared_bindings) {
    bindings.push_back({{"name", b.name}, {"type", b.type_hint}});
  }
  json out = {{"status", r.ok() ? "ok" : "error"},
              {"stdout", r.stdout_text},
              {"stderr", r.stderr_text},
              {"new_artifacts", artifacts},
              {"bindings", bindings},
              {"duration_ms", r.duration_ms}};
  if (r.traceback) out["traceback"] = to_json(*r.traceback);
  return out;
}

ExecutionResult result_from_json(const json& v) {
  ExecutionResult r;
  const std::string status = v.value("status", std::string{"error"});
  r.status = status == "ok" ? ExecStatus::Ok : ExecStatus::Error;
  r.stdout_text = v.value("stdout", std::string{});
  r.stderr_text = v.value("stderr", std::string{});
  r.duration_ms = v.value("duration_ms", 0L);
  if (v.contains("traceback") && !v.at("traceback").is_null()) {
    r.traceback = traceback_from_json(v.at("traceback"));
  }
  if (v.contains("bindings")) {
    for (const auto& b : v.at("bindings")) {
      if (b.is_string()) {
        r.declared_bindings.push_back({b.get<std::string>(), ""});
      } else {
        r.declared_bindings.push_back(
            {b.value("name", std::string{}), b.value("type", std::string{})});
      }
    }
  }
  if (v.contains("new_artifacts")) {
    for (const auto& a : v.at("new_artifacts")) {
      r.new_artifacts.push_back(
          {a.value("path", std::string{}), a.value("media_type", std::string{})});
    }
  }
  // Keep the status/traceback invariant even for sloppy workers.
  if (r.status == ExecStatus::Error && !r.traceback) {
    r.traceback = Traceback{"WorkerError", r.stderr_text, {}};
  }
  if (r.status == ExecStatus::Ok) r.traceback.reset();
  return r;
}

std::string new_uuid() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_int_distribution<std::uint64_t> dist;
  std::uint64_t hi = dist(rng), lo = dist(rng);
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

Workspace create_workspace(const std::filesystem::path& root_dir) {
  return create_workspace(root_dir, new_uuid());
}

Workspace create_workspace(const std::filesystem::path& root_dir, const std::string& session_id) {
  namespace fs = std::filesystem;
  if (session_id.empty() || session_id.find_first_of("/\\") != std::string::npos ||
      session_id == "." || session_id == "..") {
    throw Error(ErrorCode::InvalidArgument, "bad session id '" + session_id + "'");
  }
  std::error_code ec;
  const fs::path root = fs::absolute(root_dir, ec).lexically_normal();
  fs::create_directories(root, ec);
  const fs::path dir = root / session_id;
  if (ec || !fs::create_directory(dir, ec) || ec) {
    throw Error(ErrorCode::SpawnFailure, "cannot create workspace " + dir.string() +
                                             (ec ? ": " + ec.message() : ": already exists"));
  }
  return Workspace{session_id, dir, now_utc()};
}

bool path_within(const std::filesystem::path& root, const std::filesystem::path& candidate) {
  const auto r = root.lexically_normal();
  const auto c = candidate.lexically_normal();
  auto rel = c.lexically_relative(r);
  if (rel.empty()) return false;
  auto first = *rel.begin();
  return first != ".." && first != "." && !rel.is_absolute();
}

}  // namespace geoagent::sandbox
