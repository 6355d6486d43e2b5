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

#include "geoagent/sandbox/kernel.hpp"

#include <map>

#include "geoagent/error.hpp"

namespace geoagent::sandbox {

namespace fs = std::filesystem;

namespace {

struct FileStamp {
  fs::file_time_type mtime;
  std::uintmax_t size;

  bool operator==(const FileStamp&) const = default;
};

std::map<fs::path, FileStamp> snapshot(const fs::path& root) {
  std::map<fs::path, FileStamp> out;
  std::error_code ec;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  for (; !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    const auto status = it->symlink_status(ec);
    if (ec || !fs::is_regular_file(status)) continue;
    out[it->path()] = FileStamp{it->last_write_time(ec), it->file_size(ec)};
  }
  return out;
}

}  // namespace

std::unique_ptr<ScriptedTransport> ScriptedTransport::table(std::vector<json> replies) {
  if (replies.empty()) throw Error(ErrorCode::InvalidArgument, "empty reply table");
  return std::make_unique<ScriptedTransport>(
      [replies = std::move(replies)](const std::string&, int index,
                                     const Workspace&) -> std::optional<json> {
        return replies[std::min<std::size_t>(static_cast<std::size_t>(index), replies.size() - 1)];
      });
}

void ScriptedTransport::hello(const Workspace& ws) {
  ws_ = ws;
  alive_ = true;
}

std::optional<json> ScriptedTransport::exec(const json& request, std::chrono::milliseconds) {
  if (!alive_) throw Error(ErrorCode::KernelDead, "scripted kernel is not running");
  const std::string code = request.at("code").get<std::string>();
  submissions_.push_back(code);
  std::optional<json> reply;
  try {
    reply = handler_(code, index_++, ws_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::KernelDead) alive_ = false;
    throw;
  }
  if (!reply) {
    alive_ = false;
    return std::nullopt;
  }
  json out = *reply;
  out["id"] = request.at("id");
  return out;
}

KernelHandle::KernelHandle(Workspace ws, std::unique_ptr<Transport> transport)
    : ws_(std::move(ws)), transport_(std::move(transport)) {
  if (!transport_) throw Error(ErrorCode::SpawnFailure, "no transport");
  transport_->hello(ws_);
}

KernelHandle::~KernelHandle() {
  try {
    shutdown();
  } catch (...) {
  }
}

bool KernelHandle::alive() const {
  std::lock_guard lock(mu_);
  return transport_->alive();
}

int KernelHandle::executions() const {
  std::lock_guard lock(mu_);
  return executions_;
}

void KernelHandle::shutdown() {
  std::lock_guard lock(mu_);
  if (transport_->alive()) transport_->bye();
}

ExecutionResult KernelHandle::execute(const std::string& code, double timeout_s) {
  std::lock_guard lock(mu_);
  if (!transport_->alive()) {
    throw Error(ErrorCode::KernelDead, "kernel for session " + ws_.session_id + " is not running");
  }
  const auto before = snapshot(ws_.root_path);
  const long id = next_id_++;
  const json request = {{"id", id}, {"op", "exec"}, {"code", code}, {"timeout_s", timeout_s}};
  const auto started = std::chrono::steady_clock::now();
  ++executions_;
  const auto timeout = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000.0));
  std::optional<json> reply = transport_->exec(request, timeout);
  const long elapsed = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                             std::chrono::steady_clock::now() - started)
                                             .count());
  ExecutionResult result;
  if (!reply) {
    result = ExecutionResult::failure(
        "Timeout", "execution exceeded " + std::to_string(timeout_s) + " s; kernel stopped");
    result.duration_ms = elapsed;
  } else {
    if (reply->value("id", -1L) != id) {
      throw Error(ErrorCode::KernelDead, "reply id mismatch: sent " + std::to_string(id) +
                                             ", got " + reply->value("id", json()).dump());
    }
    result = result_from_json(*reply);
    if (!reply->contains("duration_ms")) result.duration_ms = elapsed;
  }
  result.new_artifacts.clear();
  for (const auto& [path, stamp] : snapshot(ws_.root_path)) {
    auto it = before.find(path);
    if (it != before.end() && it->second == stamp) continue;
    if (!path_within(ws_.root_path, path)) continue;
    result.new_artifacts.push_back({path.string(), media_type_for(path)});
  }
  return result;
}

Session create_session(const fs::path& root_dir, const TransportFactory& factory) {
  Workspace ws = create_workspace(root_dir);
  auto kernel = std::make_unique<KernelHandle>(ws, factory());
  return Session{std::move(ws), std::move(kernel)};
}

}  // namespace geoagent::sandbox
