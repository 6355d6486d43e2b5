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

#include "geoagent/service/event_log.hpp"

#include "geoagent/error.hpp"

namespace geoagent::service {

const std::set<std::string>& event_kinds() {
  static const std::set<std::string> kinds = {
      "plan",     "agent_action",   "code_submitted", "execution_result", "critique",
      "figure",   "search_results", "report",         "error",            "turn_done"};
  return kinds;
}

json to_json(const SessionEvent& e) {
  return {{"seq", e.seq}, {"kind", e.kind}, {"payload", e.payload}, {"at", format_instant(e.at)}};
}

SessionEvent event_from_json(const json& value) {
  try {
    SessionEvent e;
    e.seq = value.at("seq").get<long>();
    e.kind = value.at("kind").get<std::string>();
    e.payload = value.at("payload");
    e.at = parse_instant(value.at("at").get<std::string>());
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("event: ") + ex.what());
  }
}

std::string encode_line(const SessionEvent& e) { return to_json(e).dump(); }

std::string sse_frame(const SessionEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind + "\ndata: " + encode_line(e) +
         "\n\n";
}

EventLog::EventLog(std::filesystem::path file, Clock clock)
    : file_(std::move(file)), clock_(std::move(clock)) {
  std::error_code ec;
  std::filesystem::create_directories(file_.parent_path(), ec);
  if (std::filesystem::exists(file_)) {
    std::ifstream in(file_);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto v = json::parse(line, nullptr, false);
      if (v.is_discarded()) {
        throw Error(ErrorCode::ParseError,
                    file_.string() + ":" + std::to_string(line_no) + ": not JSON");
      }
      auto e = event_from_json(v);
      if (e.seq != static_cast<long>(events_.size()) + 1) {
        throw Error(ErrorCode::ParseError,
                    file_.string() + ":" + std::to_string(line_no) + ": sequence gap");
      }
      events_.push_back(std::move(e));
    }
  }
  out_.open(file_, std::ios::app | std::ios::binary);
  if (!out_) throw Error(ErrorCode::IoError, "cannot open event log " + file_.string());
}

SessionEvent EventLog::append(const std::string& kind, const json& payload) {
  if (!event_kinds().count(kind)) {
    throw Error(ErrorCode::InvalidArgument, "unknown event kind '" + kind + "'");
  }
  std::lock_guard lock(mu_);
  SessionEvent e{static_cast<long>(events_.size()) + 1, kind, payload, clock_()};
  out_ << encode_line(e) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "event log write failed: " + file_.string());
  events_.push_back(e);
  cv_.notify_all();
  return e;
}

std::vector<SessionEvent> EventLog::since(long from_seq) const {
  std::lock_guard lock(mu_);
  const auto start = static_cast<std::size_t>(std::max(1L, from_seq) - 1);
  if (start >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(start), events_.end()};
}

std::vector<SessionEvent> EventLog::wait_since(long from_seq,
                                               std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  const auto start = static_cast<std::size_t>(std::max(1L, from_seq) - 1);
  cv_.wait_for(lock, timeout, [&] { return closed_ || events_.size() > start; });
  if (start >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(start), events_.end()};
}

long EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return static_cast<long>(events_.size());
}

void EventLog::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

bool EventLog::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

}  // namespace geoagent::service
