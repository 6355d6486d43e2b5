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

#include "geoagent/service/http.hpp"

#include <atomic>
#include <thread>

#include "httplib.h"

namespace geoagent::service {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::SessionBusy:
    case ErrorCode::DuplicateId: return 409;
    case ErrorCode::SpawnFailure: return 503;
    case ErrorCode::InvalidArgument:
    case ErrorCode::IsolationViolation:
    case ErrorCode::EmptyQuery:
    case ErrorCode::MalformedQuery:
    case ErrorCode::ParseError: return 400;
    case ErrorCode::ProviderUnreachable:
    case ErrorCode::NoMatchingScript:
    case ErrorCode::SchemaViolation: return 502;
    default: return 500;
  }
}

namespace {

constexpr auto kPoll = std::chrono::milliseconds(200);
constexpr int kKeepAlivePolls = 5;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  return body;
}

std::string string_field(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

long from_seq(const httplib::Request& req) {
  try {
    if (req.has_param("from")) return std::stol(req.get_param_value("from"));
    if (req.has_header("Last-Event-ID")) return std::stol(req.get_header_value("Last-Event-ID")) + 1;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "from must be an integer");
  }
  return 0;
}

}  // namespace

struct HttpServer::Impl {
  SessionManager& manager;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  explicit Impl(SessionManager& m) : manager(m) { routes(); }

  template <typename F>
  void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const bool test_mode = req.get_header_value(kTestModeHeader) == "1";
        send_json(res, 201, {{"session_id", manager.create_session(test_mode)}});
      });
    });

    server.Post(R"(/sessions/([^/]+)/messages)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    manager.events(id);  // 404 before a body error
                    const auto text = string_field(parse_body(req), "text");
                    send_json(res, 202, {{"turn_id", manager.post_message(id, text)}});
                  });
                });

    server.Get(R"(/sessions/([^/]+)/events)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { stream(req, res); });
               });

    server.Get(R"(/sessions/([^/]+)/artifacts/(.+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   auto a = manager.artifact(req.matches[1], req.matches[2]);
                   res.status = 200;
                   res.set_content(std::move(a.bytes), a.media_type);
                 });
               });

    server.Post("/search", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req);
        const auto query = string_field(body, "query");
        const auto arch = body.contains("architecture") ? string_field(body, "architecture")
                                                        : std::string("agentic");
        send_json(res, 200, search::to_json(manager.search(query, arch)));
      });
    });
  }

  void stream(const httplib::Request& req, httplib::Response& res) {
    EventLog& log = manager.events(req.matches[1]);
    auto next = std::make_shared<long>(std::max(1L, from_seq(req)));
    auto idle = std::make_shared<int>(0);
    res.status = 200;
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [this, &log, next, idle](std::size_t, httplib::DataSink& sink) {
          if (stopping) {
            sink.done();
            return true;
          }
          const auto events = log.wait_since(*next, kPoll);
          for (const auto& e : events) {
            const auto frame = sse_frame(e);
            if (!sink.write(frame.data(), frame.size())) return false;
            *next = e.seq + 1;
          }
          if (!events.empty()) {
            *idle = 0;
          } else if (stopping || log.closed()) {
            sink.done();
          } else if (++*idle >= kKeepAlivePolls) {
            *idle = 0;
            static const std::string ping = ": keep-alive\n\n";
            if (!sink.write(ping.data(), ping.size())) return false;
          }
          return true;
        });
  }
};

HttpServer::HttpServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace geoagent::service
