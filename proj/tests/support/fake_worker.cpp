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

// Minimal kernel worker for protocol tests. Each line of submitted code is
// one statement:
//   print <text>          append text to stdout
//   <name>=<int>          bind a variable
//   <name>                echo its value
//   <name>+<int>          echo value + int
//   <int>/<int>           echo the quotient
//   raise <Type> <msg>    fail with that exception
//   sleep <ms>            block
//   write <file> <text>   write a file in the working directory
//   pwd                   echo the working directory
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"

using nlohmann::json;

namespace {

struct Failure {
  std::string type;
  std::string message;
};

bool is_int(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

long lookup(const std::map<std::string, long>& vars, const std::string& name) {
  if (is_int(name)) return std::stol(name);
  auto it = vars.find(name);
  if (it == vars.end()) throw Failure{"NameError", "name '" + name + "' is not defined"};
  return it->second;
}

}  // namespace

int main() {
  std::map<std::string, long> vars;
  std::string line;
  while (std::getline(std::cin, line)) {
    json req = json::parse(line, nullptr, false);
    if (req.is_discarded()) continue;
    const std::string op = req.value("op", "");
    if (op == "hello") {
      std::cout << json{{"op", "hello"}, {"protocol", 1}, {"pid", ::getpid()}}.dump() << std::endl;
      continue;
    }
    if (op == "bye") return 0;
    if (op != "exec") continue;

    const auto started = std::chrono::steady_clock::now();
    std::string out;
    json reply = {{"id", req.at("id")}, {"stderr", ""}};
    std::istringstream code(req.value("code", ""));
    std::string stmt;
    int lineno = 0;
    try {
      while (std::getline(code, stmt)) {
        ++lineno;
        if (stmt.empty()) continue;
        try {
          if (stmt.rfind("print ", 0) == 0) {
            out += stmt.substr(6) + "\n";
          } else if (stmt.rfind("raise ", 0) == 0) {
            std::istringstream in(stmt.substr(6));
            std::string type, msg;
            in >> type;
            std::getline(in >> std::ws, msg);
            throw Failure{type, msg};
          } else if (stmt.rfind("sleep ", 0) == 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(std::stol(stmt.substr(6))));
          } else if (stmt.rfind("write ", 0) == 0) {
            std::istringstream in(stmt.substr(6));
            std::string file, text;
            in >> file;
            std::getline(in >> std::ws, text);
            std::filesystem::create_directories(std::filesystem::path(file).parent_path().empty()
                                                    ? "."
                                                    : std::filesystem::path(file).parent_path());
            std::ofstream(file) << text;
          } else if (stmt == "pwd") {
            out += std::filesystem::current_path().string() + "\n";
          } else if (auto eq = stmt.find('='); eq != std::string::npos) {
            vars[stmt.substr(0, eq)] = lookup(vars, stmt.substr(eq + 1));
          } else if (auto plus = stmt.find('+'); plus != std::string::npos) {
            out += std::to_string(lookup(vars, stmt.substr(0, plus)) +
                                  lookup(vars, stmt.substr(plus + 1))) + "\n";
          } else if (auto slash = stmt.find('/'); slash != std::string::npos) {
            const long d = lookup(vars, stmt.substr(slash + 1));
            if (d == 0) throw Failure{"ZeroDivisionError", "division by zero"};
            out += std::to_string(lookup(vars, stmt.substr(0, slash)) / d) + "\n";
          } else {
            out += std::to_string(lookup(vars, stmt)) + "\n";
          }
        } catch (const std::invalid_argument&) {
          throw Failure{"SyntaxError", "invalid syntax"};
        }
      }
      reply["status"] = "ok";
    } catch (const Failure& f) {
      reply["status"] = "error";
      reply["traceback"] = {{"exception_type", f.type},
                            {"message", f.message},
                            {"frames", json::array({{{"file", "<cell>"},
                                                     {"line", lineno},
                                                     {"code_line", stmt}}})}};
    }
    json bindings = json::array();
    for (const auto& [name, _] : vars) bindings.push_back(name);
    reply["stdout"] = out;
    reply["bindings"] = bindings;
    reply["duration_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
