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
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geoagent/time.hpp"
#include "json.hpp"

namespace geoagent::service {

using nlohmann::json;

const std::set<std::string>& event_kinds();

struct SessionEvent {
  long seq = 0;
  std::string kind;
  json payload;
  Instant at;

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

json to_json(const SessionEvent& e);
/// Throws ParseError.
SessionEvent event_from_json(const json& value);

/// One event per line, compact JSON with sorted keys.
std::string encode_line(const SessionEvent& e);

/// text/event-stream frame: id, event and data lines.
std::string sse_frame(const SessionEvent& e);

using Clock = std::function<Instant()>;

/// Append-only per-session log backed by a JSON-lines file. Sequence
/// numbers start at 1 and have no gaps. Reopening a file resumes after its
/// last event.
class EventLog {
 public:
  EventLog(std::filesystem::path file, Clock clock = now_utc);

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Throws InvalidArgument for an unknown kind, IoError when the line
  /// cannot be written.
  SessionEvent append(const std::string& kind, const json& payload);

  /// Events with seq >= from_seq, in order.
  std::vector<SessionEvent> since(long from_seq) const;

  /// Blocks until an event with seq >= from_seq exists, the log is closed
  /// or the timeout passes. Returns the events found.
  std::vector<SessionEvent> wait_since(long from_seq, std::chrono::milliseconds timeout) const;

  long last_seq() const;
  const std::filesystem::path& file() const { return file_; }

  /// Wakes every waiter; later appends still work.
  void close();
  bool closed() const;

 private:
  std::filesystem::path file_;
  Clock clock_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<SessionEvent> events_;
  std::ofstream out_;
  bool closed_ = false;
};

}  // namespace geoagent::service
