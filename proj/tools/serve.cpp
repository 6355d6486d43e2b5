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

// serve: runs the session HTTP service.
//
//   serve --config SERVICE.json [--host 127.0.0.1] [--port 8080]
//
// SIGINT or SIGTERM stops the listener and waits for running turns.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "geoagent/error.hpp"
#include "geoagent/service/http.hpp"
#include "geoagent/service/service.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

extern "C" void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  using namespace geoagent;
  CLI::App app{"Session HTTP service"};
  std::string config_path;
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--config", config_path, "Service config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port; 0 picks a free one")->check(CLI::Range(0, 65535));
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    const auto cfg = nlohmann::json::parse(in, nullptr, false);
    if (cfg.is_discarded()) throw Error(ErrorCode::ParseError, config_path + " is not valid JSON");
    const auto base = std::filesystem::absolute(config_path).parent_path();
    service::SessionManager manager(service::ServiceConfig::from_json(cfg, base));
    service::HttpServer server(manager);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const int bound = server.start(host, port);
    std::cout << "listening on " << host << ":" << bound << std::endl;
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    manager.shutdown();
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::ParseError ? 2 : 1;
  }
  return 0;
}
