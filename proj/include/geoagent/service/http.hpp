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

#include <memory>
#include <string>

#include "geoagent/error.hpp"
#include "geoagent/service/service.hpp"

namespace geoagent::service {

/// POST /sessions with this header set to 1 gets the scripted kernel.
inline constexpr const char* kTestModeHeader = "X-Test-Mode";

int http_status(ErrorCode code);

/// Routes:
///   POST /sessions                        -> 201 {session_id}
///   POST /sessions/{id}/messages {text}   -> 202 {turn_id}
///   GET  /sessions/{id}/events?from=SEQ   -> text/event-stream
///   GET  /sessions/{id}/artifacts/{name}  -> bytes
///   POST /search {query, architecture}    -> 200 RankedResults
///   GET  /health                          -> 200 {status}
/// Errors carry {error, message}.
class HttpServer {
 public:
  explicit HttpServer(SessionManager& manager);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Serves on a background thread. Port 0 picks a free one; returns the
  /// bound port. Throws IoError when binding fails.
  int start(const std::string& host, int port);
  /// Blocks until stop().
  void listen(const std::string& host, int port);
  /// Ends open event streams and stops the listener.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace geoagent::service
