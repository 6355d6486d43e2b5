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

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "geoagent/sandbox/types.hpp"

namespace geoagent::sandbox {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kDefaultTimeoutS = 120.0;

/// Raw worker connection speaking the line-delimited JSON protocol:
///
///   -> {"op":"hello","protocol":1,"workspace":"<dir>"}
///   -> {"id":N,"op":"exec","code":"...","timeout_s":T}
///   <- {"id":N,"status":"ok"|"error","stdout","stderr","traceback"?,
///       "bindings":[...],"duration_ms"}
///   -> {"op":"bye"}
class Transport {
 public:
  virtual ~Transport() = default;

  /// Handshake; throws SpawnFailure when the worker rejects it.
  virtual void hello(const Workspace& ws) = 0;
  /// One exec round trip. nullopt on timeout, after which the worker is
  /// gone. Throws KernelDead when the connection is lost.
  virtual std::optional<json> exec(const json& request, std::chrono::milliseconds timeout) = 0;
  virtual void bye() = 0;
  virtual bool alive() const = 0;
};

/// Test double. The handler sees every submission with its 0-based index
/// and the workspace (so it can drop files there). Returning nullopt
/// simulates a timeout; throwing Error(KernelDead) simulates a crash.
class ScriptedTransport : public Transport {
 public:
  using Handler =
      std::function<std::optional<json>(const std::string& code, int index, const Workspace& ws)>;

  explicit ScriptedTransport(Handler handler) : handler_(std::move(handler)) {}

  /// Reply i answers submission i; the last reply repeats.
  static std::unique_ptr<ScriptedTransport> table(std::vector<json> replies);

  void hello(const Workspace& ws) override;
  std::optional<json> exec(const json& request, std::chrono::milliseconds timeout) override;
  void bye() override { alive_ = false; }
  bool alive() const override { return alive_; }

  std::vector<std::string> submissions() const { return submissions_; }

 private:
  Handler handler_;
  Workspace ws_;
  bool alive_ = false;
  int index_ = 0;
  std::vector<std::string> submissions_;
};

/// Worker child process with its working directory pinned to the
/// workspace; talks over its stdin/stdout.
class ProcessTransport : public Transport {
 public:
  explicit ProcessTransport(std::vector<std::string> argv) : argv_(std::move(argv)) {}
  ~ProcessTransport() override;

  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  void hello(const Workspace& ws) override;
  std::optional<json> exec(const json& request, std::chrono::milliseconds timeout) override;
  void bye() override;
  bool alive() const override { return pid_ > 0; }

 private:
  void write_line(const std::string& line);
  /// Reads one line; nullopt on timeout. Throws KernelDead on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  void kill_child();

  std::vector<std::string> argv_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// A live kernel bound to one session workspace. Submissions are
/// serialized; each result lists workspace files created or modified by the
/// submission.
class KernelHandle {
 public:
  /// Performs the handshake. Throws SpawnFailure.
  KernelHandle(Workspace ws, std::unique_ptr<Transport> transport);
  ~KernelHandle();

  KernelHandle(const KernelHandle&) = delete;
  KernelHandle& operator=(const KernelHandle&) = delete;

  /// Throws KernelDead when the worker is gone. A timeout yields an error
  /// result with exception_type "Timeout" and leaves the kernel dead.
  ExecutionResult execute(const std::string& code, double timeout_s = kDefaultTimeoutS);

  bool alive() const;
  const Workspace& workspace() const { return ws_; }
  int executions() const;
  void shutdown();

 private:
  Workspace ws_;
  std::unique_ptr<Transport> transport_;
  mutable std::mutex mu_;
  long next_id_ = 1;
  int executions_ = 0;
};

struct Session {
  Workspace workspace;
  std::unique_ptr<KernelHandle> kernel;
};

using TransportFactory = std::function<std::unique_ptr<Transport>()>;

/// Fresh workspace under `root_dir` plus a started kernel.
Session create_session(const std::filesystem::path& root_dir, const TransportFactory& factory);

}  // namespace geoagent::sandbox
