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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "geoagent/error.hpp"
#include "geoagent/sandbox/kernel.hpp"

namespace geoagent::sandbox {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ProcessTransport::~ProcessTransport() {
  if (pid_ > 0) {
    try {
      bye();
    } catch (...) {
      kill_child();
    }
  }
}

void ProcessTransport::hello(const Workspace& ws) {
  if (argv_.empty()) throw Error(ErrorCode::SpawnFailure, "empty worker command");
  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorCode::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> args;
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);
  const std::string dir = ws.root_path.string();

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::SpawnFailure, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::signal(SIGPIPE, SIG_IGN);

  try {
    write_line(json{{"op", "hello"}, {"protocol", kProtocolVersion}, {"workspace", dir}}.dump());
    auto line = read_line(std::chrono::seconds(30));
    if (!line) throw Error(ErrorCode::SpawnFailure, "worker did not answer the handshake");
    const json reply = json::parse(*line, nullptr, false);
    if (reply.is_discarded() || reply.value("protocol", 0) != kProtocolVersion) {
      throw Error(ErrorCode::SpawnFailure, "bad handshake reply: " + *line);
    }
  } catch (const Error& e) {
    kill_child();
    if (e.code() == ErrorCode::SpawnFailure) throw;
    throw Error(ErrorCode::SpawnFailure, std::string("worker ") + argv_[0] + ": " + e.what());
  }
}

void ProcessTransport::write_line(const std::string& line) {
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::KernelDead, std::string("write to worker: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ProcessTransport::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::KernelDead, std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      kill_child();
      throw Error(ErrorCode::KernelDead, "worker closed its output");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<json> ProcessTransport::exec(const json& request,
                                           std::chrono::milliseconds timeout) {
  if (pid_ <= 0) throw Error(ErrorCode::KernelDead, "worker is not running");
  write_line(request.dump());
  while (true) {
    auto line = read_line(timeout);
    if (!line) {
      kill_child();
      return std::nullopt;
    }
    json reply = json::parse(*line, nullptr, false);
    if (reply.is_discarded()) {
      kill_child();
      throw Error(ErrorCode::KernelDead, "worker sent a non-JSON line: " + *line);
    }
    // Stray replies from earlier ids are skipped.
    if (reply.value("id", json()) == request.at("id")) return reply;
  }
}

void ProcessTransport::bye() {
  if (pid_ <= 0) return;
  try {
    write_line(json{{"op", "bye"}}.dump());
  } catch (const Error&) {
  }
  close_fd(to_child_);
  for (int i = 0; i < 50; ++i) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      close_fd(from_child_);
      return;
    }
    ::usleep(20000);
  }
  kill_child();
}

void ProcessTransport::kill_child() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  close_fd(to_child_);
  close_fd(from_child_);
}

}  // namespace geoagent::sandbox
