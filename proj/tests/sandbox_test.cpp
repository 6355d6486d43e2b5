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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>

#include "geoagent/error.hpp"
#include "geoagent/llm/backends.hpp"
#include "geoagent/sandbox/kernel.hpp"
#include "geoagent/sandbox/repair.hpp"
#include "support/temp_dir.hpp"

using namespace geoagent;
using namespace geoagent::sandbox;
using testutil::TempDir;

namespace {

json ok_reply(const std::string& out = "") {
  return {{"status", "ok"}, {"stdout", out}, {"stderr", ""}, {"bindings", json::array()},
          {"duration_ms", 1}};
}

json error_reply(const std::string& type, const std::string& message, int line = 1) {
  return {{"status", "error"},
          {"stdout", ""},
          {"stderr", ""},
          {"traceback",
           {{"exception_type", type},
            {"message", message},
            {"frames", json::array({{{"file", "<cell>"},
                                     {"line", line},
                                     {"code_line", "value = data[" + std::to_string(line) + "]"}}})}}},
          {"bindings", json::array()},
          {"duration_ms", 1}};
}

TransportFactory table_factory(std::vector<json> replies) {
  return [replies] { return ScriptedTransport::table(replies); };
}

// Stateful double: "name=int" binds, "name+int" reads the binding back.
std::unique_ptr<ScriptedTransport> stateful_transport() {
  auto vars = std::make_shared<std::map<std::string, long>>();
  return std::make_unique<ScriptedTransport>(
      [vars](const std::string& code, int, const Workspace&) -> std::optional<json> {
        if (auto eq = code.find('='); eq != std::string::npos) {
          (*vars)[code.substr(0, eq)] = std::stol(code.substr(eq + 1));
          json r = ok_reply();
          r["bindings"] = json::array({code.substr(0, eq)});
          return r;
        }
        const auto plus = code.find('+');
        const auto name = code.substr(0, plus);
        auto it = vars->find(name);
        if (it == vars->end()) return error_reply("NameError", "name '" + name + "' is not defined");
        return ok_reply(std::to_string(it->second + std::stol(code.substr(plus + 1))) + "\n");
      });
}

std::vector<std::string> fake_worker_argv() { return {GEOAGENT_FAKE_WORKER}; }

std::string fenced(const std::string& code) { return "```python\n" + code + "\n```"; }

}  // namespace

TEST(Workspace, SessionsGetDistinctUuidDirectories) {
  TempDir tmp;
  auto a = create_session(tmp.path(), table_factory({ok_reply()}));
  auto b = create_session(tmp.path(), table_factory({ok_reply()}));
  EXPECT_NE(a.workspace.session_id, b.workspace.session_id);
  EXPECT_NE(a.workspace.root_path, b.workspace.root_path);
  EXPECT_TRUE(std::filesystem::is_directory(a.workspace.root_path));
  EXPECT_EQ(a.workspace.root_path.parent_path(), std::filesystem::absolute(tmp.path()));
  EXPECT_EQ(a.workspace.session_id.size(), 36u);
  EXPECT_EQ(a.workspace.session_id[14], '4');
}

TEST(Workspace, UnwritableRootIsSpawnFailure) {
  TempDir tmp;
  const auto blocker = tmp.path() / "plain-file";
  std::ofstream(blocker) << "x";
  try {
    create_session(blocker / "sessions", table_factory({ok_reply()}));
    FAIL() << "expected SpawnFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpawnFailure);
  }
  EXPECT_THROW(create_workspace(tmp.path(), "../escape"), Error);
}

TEST(Workspace, PathContainment) {
  EXPECT_TRUE(path_within("/w/s1", "/w/s1/fig.png"));
  EXPECT_TRUE(path_within("/w/s1", "/w/s1/a/../b.csv"));
  EXPECT_FALSE(path_within("/w/s1", "/w/s1/../s2/fig.png"));
  EXPECT_FALSE(path_within("/w/s1", "/w/s10/fig.png"));
  EXPECT_FALSE(path_within("/w/s1", "/w/s1"));
}

TEST(Types, ResultJsonKeepsTracebackInvariant) {
  auto r = result_from_json(error_reply("KeyError", "'temp'", 3));
  ASSERT_TRUE(r.traceback);
  EXPECT_EQ(r.traceback->exception_type, "KeyError");
  EXPECT_EQ(result_from_json(to_json(r)), r);

  json sloppy = {{"status", "error"}, {"stderr", "boom"}};
  auto s = result_from_json(sloppy);
  ASSERT_TRUE(s.traceback);
  EXPECT_EQ(s.traceback->exception_type, "WorkerError");

  json ok_with_tb = ok_reply();
  ok_with_tb["traceback"] = error_reply("X", "y")["traceback"];
  EXPECT_FALSE(result_from_json(ok_with_tb).traceback);
}

TEST(Types, RenderTracebackPythonStyle) {
  Traceback tb{"ZeroDivisionError", "division by zero", {{"<cell>", 2, "1/0"}}};
  EXPECT_EQ(render_traceback(tb),
            "Traceback (most recent call last):\n  File \"<cell>\", line 2\n    1/0\n"
            "ZeroDivisionError: division by zero\n");
}

TEST(Types, MediaTypes) {
  EXPECT_EQ(media_type_for("a/fig.PNG"), "image/png");
  EXPECT_EQ(media_type_for("x.csv"), "text/csv");
  EXPECT_EQ(media_type_for("x.nc"), "application/x-netcdf");
  EXPECT_EQ(media_type_for("noext"), "application/octet-stream");
  EXPECT_TRUE(is_image_media_type("image/svg+xml"));
  EXPECT_FALSE(is_image_media_type("text/csv"));
}

TEST(Kernel, StatePersistsAcrossSubmissions) {
  TempDir tmp;
  auto s = create_session(tmp.path(), [] { return stateful_transport(); });
  EXPECT_TRUE(s.kernel->execute("x=1").ok());
  auto r = s.kernel->execute("x+1");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.stdout_text, "2\n");
  auto missing = s.kernel->execute("y+1");
  ASSERT_FALSE(missing.ok());
  EXPECT_EQ(missing.traceback->exception_type, "NameError");
  EXPECT_EQ(s.kernel->executions(), 3);
}

TEST(Kernel, TimeoutKillsKernel) {
  TempDir tmp;
  auto s = create_session(tmp.path(), [] {
    return std::make_unique<ScriptedTransport>(
        [](const std::string&, int, const Workspace&) -> std::optional<json> {
          return std::nullopt;
        });
  });
  auto r = s.kernel->execute("loop forever", 0.01);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.traceback->exception_type, "Timeout");
  EXPECT_FALSE(s.kernel->alive());
  try {
    s.kernel->execute("x=1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KernelDead);
  }
}

TEST(Kernel, ArtifactDiffMatchesWorkspaceOracle) {
  TempDir tmp;
  auto s = create_session(tmp.path(), [] {
    return std::make_unique<ScriptedTransport>(
        [](const std::string& code, int, const Workspace& ws) -> std::optional<json> {
          std::istringstream in(code);
          std::string name;
          while (in >> name) {
            std::filesystem::create_directories((ws.root_path / name).parent_path());
            std::ofstream(ws.root_path / name, std::ios::app) << code;
          }
          return ok_reply();
        });
  });
  const auto root = s.workspace.root_path;
  std::ofstream(root / "before.txt") << "old";

  auto first = s.kernel->execute("fig.png out/table.csv");
  std::set<ArtifactRecord, decltype([](const ArtifactRecord& a, const ArtifactRecord& b) {
             return a.path < b.path;
           })>
      got(first.new_artifacts.begin(), first.new_artifacts.end());
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got.begin()->path, (root / "fig.png").string());
  EXPECT_EQ(got.begin()->media_type, "image/png");
  EXPECT_EQ(std::next(got.begin())->media_type, "text/csv");

  // Modification counts; untouched files do not.
  auto second = s.kernel->execute("fig.png");
  ASSERT_EQ(second.new_artifacts.size(), 1u);
  EXPECT_EQ(second.new_artifacts[0].path, (root / "fig.png").string());
  EXPECT_TRUE(s.kernel->execute("").new_artifacts.empty());
  for (const auto& a : first.new_artifacts) EXPECT_TRUE(path_within(root, a.path));
}

TEST(Kernel, SubmissionsAreSerialized) {
  TempDir tmp;
  auto in_flight = std::make_shared<std::atomic<int>>(0);
  auto overlap = std::make_shared<std::atomic<bool>>(false);
  auto s = create_session(tmp.path(), [=] {
    return std::make_unique<ScriptedTransport>(
        [=](const std::string& code, int, const Workspace&) -> std::optional<json> {
          if (in_flight->fetch_add(1) != 0) *overlap = true;
          std::this_thread::sleep_for(std::chrono::milliseconds(2));
          in_flight->fetch_sub(1);
          return ok_reply(code);
        });
  });
  std::vector<std::future<ExecutionResult>> futures;
  for (int i = 0; i < 16; ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      return s.kernel->execute("cell " + std::to_string(i));
    }));
  }
  for (int i = 0; i < 16; ++i) EXPECT_EQ(futures[i].get().stdout_text, "cell " + std::to_string(i));
  EXPECT_FALSE(*overlap);
}

TEST(ProcessKernel, RoundTripsThroughWorkerProcess) {
  TempDir tmp;
  auto s = create_session(tmp.path(),
                          [] { return std::make_unique<ProcessTransport>(fake_worker_argv()); });
  auto hi = s.kernel->execute("print hi");
  ASSERT_TRUE(hi.ok());
  EXPECT_EQ(hi.stdout_text, "hi\n");

  EXPECT_TRUE(s.kernel->execute("x=1").ok());
  auto next = s.kernel->execute("x+1");
  EXPECT_EQ(next.stdout_text, "2\n");
  ASSERT_EQ(next.declared_bindings.size(), 1u);
  EXPECT_EQ(next.declared_bindings[0].name, "x");

  auto div = s.kernel->execute("x=4\n4/0");
  ASSERT_FALSE(div.ok());
  EXPECT_EQ(div.traceback->exception_type, "ZeroDivisionError");
  ASSERT_EQ(div.traceback->frames.size(), 1u);
  EXPECT_EQ(div.traceback->frames[0].line, 2);
  EXPECT_EQ(div.traceback->frames[0].code_line, "4/0");

  auto pwd = s.kernel->execute("pwd");
  EXPECT_EQ(std::filesystem::path(pwd.stdout_text.substr(0, pwd.stdout_text.size() - 1)),
            s.workspace.root_path);

  auto fig = s.kernel->execute("write plots/sst.png PNGDATA");
  ASSERT_EQ(fig.new_artifacts.size(), 1u);
  EXPECT_EQ(fig.new_artifacts[0].path, (s.workspace.root_path / "plots/sst.png").string());
  EXPECT_EQ(fig.new_artifacts[0].media_type, "image/png");
  s.kernel->shutdown();
  EXPECT_FALSE(s.kernel->alive());
}

TEST(ProcessKernel, TimeoutKillsWorker) {
  TempDir tmp;
  auto s = create_session(tmp.path(),
                          [] { return std::make_unique<ProcessTransport>(fake_worker_argv()); });
  auto r = s.kernel->execute("sleep 5000", 0.2);
  EXPECT_EQ(r.traceback->exception_type, "Timeout");
  EXPECT_LT(r.duration_ms, 3000);
  EXPECT_FALSE(s.kernel->alive());
  EXPECT_THROW(s.kernel->execute("print again"), Error);
}

TEST(ProcessKernel, MissingBinaryIsSpawnFailure) {
  TempDir tmp;
  try {
    create_session(tmp.path(), [] {
      return std::make_unique<ProcessTransport>(
          std::vector<std::string>{"/nonexistent/geoagent-worker"});
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpawnFailure);
  }
}

TEST(ExtractCode, FirstFencedBlock) {
  EXPECT_EQ(extract_code("text\n```python\na=1\nb=2\n```\nmore ```x\ny\n```"), "a=1\nb=2");
  EXPECT_EQ(extract_code("```\nplain\n```"), "plain");
  EXPECT_FALSE(extract_code("no code here"));
  EXPECT_FALSE(extract_code("```python\nunterminated"));
}

namespace {

struct RepairRig {
  TempDir tmp;
  llm::ScriptedBackend primary;
  llm::ScriptedBackend secondary;
  Session session;

  explicit RepairRig(std::vector<json> kernel_replies)
      : session(create_session(tmp.path(), table_factory(std::move(kernel_replies)))) {
    primary.add_rule({kGenerateMarker}, fenced("step()"));
    primary.add_rule({kRepairMarker}, fenced("step_fixed()"));
    secondary.add_rule({kEscalateMarker}, fenced("wise_step()"));
  }

  std::size_t escalations() const {
    std::size_t n = 0;
    for (const auto& r : secondary.requests()) {
      if (r.full_text().find(kEscalateMarker) != std::string::npos) ++n;
    }
    return n;
  }
};

}  // namespace

TEST(Repair, FailTwiceThenSucceed) {
  RepairRig rig(std::vector<json>{error_reply("KeyError", "a"), error_reply("ValueError", "b"), ok_reply("done")});
  auto out = repair_loop("plot sst", *rig.session.kernel, rig.primary, rig.secondary);
  EXPECT_EQ(out.kind, OutcomeKind::Success);
  EXPECT_EQ(out.executions, 3);
  EXPECT_EQ(rig.session.kernel->executions(), 3);
  EXPECT_FALSE(out.escalated);
  EXPECT_EQ(rig.escalations(), 0u);
  EXPECT_EQ(out.context.attempts.size(), 3u);
  EXPECT_EQ(out.context.budget_remaining, 0);
  EXPECT_EQ(out.result->stdout_text, "done");
}

TEST(Repair, FirstSuccessMakesNoRepairCall) {
  RepairRig rig(std::vector<json>{ok_reply()});
  auto out = repair_loop("plot sst", *rig.session.kernel, rig.primary, rig.secondary);
  EXPECT_EQ(out.kind, OutcomeKind::Success);
  EXPECT_EQ(out.executions, 1);
  EXPECT_EQ(rig.primary.request_count(), 1u);
  EXPECT_EQ(rig.secondary.request_count(), 0u);
}

TEST(Repair, RepairPromptCarriesLastAttemptOnly) {
  RepairRig rig(std::vector<json>{error_reply("KeyError", "first-failure", 1), error_reply("IndexError", "second-failure", 2),
                 ok_reply()});
  RepairConfig cfg;
  cfg.context_block = "[ledger]\nvariables:\n  ds: Dataset\n[/ledger]";
  repair_loop("compute anomaly", *rig.session.kernel, rig.primary, rig.secondary, cfg);
  const auto reqs = rig.primary.requests();
  ASSERT_EQ(reqs.size(), 3u);
  const auto third = reqs[2].full_text();
  EXPECT_NE(third.find("compute anomaly"), std::string::npos);
  EXPECT_NE(third.find(cfg.context_block), std::string::npos);
  EXPECT_NE(third.find("second-failure"), std::string::npos);
  EXPECT_EQ(third.find("first-failure"), std::string::npos);
  EXPECT_NE(reqs[0].full_text().find(cfg.context_block), std::string::npos);
}

TEST(Repair, ExhaustionEscalatesOnceWithVerbatimTracebacks) {
  std::vector<json> replies;
  for (int i = 0; i < 3; ++i) replies.push_back(error_reply("KeyError", "'depth' #" + std::to_string(i), i + 1));
  replies.push_back(ok_reply("wise"));
  RepairRig rig(replies);
  auto out = repair_loop("depth bins", *rig.session.kernel, rig.primary, rig.secondary);
  EXPECT_EQ(out.kind, OutcomeKind::Escalated);
  EXPECT_TRUE(out.escalated);
  EXPECT_EQ(out.executions, 4);
  EXPECT_EQ(rig.escalations(), 1u);
  ASSERT_EQ(out.context.attempts.size(), 4u);
  EXPECT_EQ(out.context.attempts.back().code, "wise_step()");

  const auto prompt = rig.secondary.requests().at(0).full_text();
  for (int i = 0; i < 3; ++i) {
    const auto tb = render_traceback(*out.context.attempts[i].result.traceback);
    EXPECT_NE(prompt.find(tb), std::string::npos) << tb;
    EXPECT_NE(prompt.find(out.context.attempts[i].code), std::string::npos);
  }
  EXPECT_EQ(rig.secondary.requests().at(0).model_tag, "secondary");
}

TEST(Repair, SecondaryFailureKeepsFourAttempts) {
  RepairRig rig(std::vector<json>{error_reply("E", "x")});
  auto out = repair_loop("t", *rig.session.kernel, rig.primary, rig.secondary);
  EXPECT_EQ(out.kind, OutcomeKind::Failed);
  EXPECT_EQ(out.context.attempts.size(), 4u);
  EXPECT_EQ(out.executions, 4);
  EXPECT_FALSE(out.error);
}

TEST(Repair, ReplyWithoutCodeIsNoCodeAttempt) {
  RepairRig rig(std::vector<json>{ok_reply()});
  llm::ScriptedBackend chatty;
  chatty.add_rule({kGenerateMarker}, "I would load the dataset first.");
  chatty.add_rule({kRepairMarker}, fenced("load()"));
  auto out = repair_loop("t", *rig.session.kernel, chatty, rig.secondary);
  EXPECT_EQ(out.kind, OutcomeKind::Success);
  ASSERT_EQ(out.context.attempts.size(), 2u);
  EXPECT_EQ(out.context.attempts[0].result.traceback->exception_type, "NoCode");
  EXPECT_EQ(out.executions, 1);
  EXPECT_NE(chatty.requests()[1].full_text().find("I would load the dataset first."),
            std::string::npos);
}

TEST(Repair, GatewayErrorIsFailedWithContext) {
  RepairRig rig(std::vector<json>{error_reply("E", "x")});
  llm::ScriptedBackend partial;
  partial.add_rule({kGenerateMarker}, fenced("a()"));
  auto out = repair_loop("t", *rig.session.kernel, partial, rig.secondary);
  EXPECT_EQ(out.kind, OutcomeKind::Failed);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(out.context.attempts.size(), 1u);
}

TEST(Repair, EscalateNeedsAttempts) {
  RepairRig rig(std::vector<json>{ok_reply()});
  RepairContext empty;
  EXPECT_THROW(escalate(empty, rig.secondary, *rig.session.kernel, RepairConfig{}), Error);
  RepairConfig zero;
  zero.budget = 0;
  EXPECT_THROW(repair_loop("t", *rig.session.kernel, rig.primary, rig.secondary, zero), Error);
}

// Exhaustive over failure patterns up to length 6 and budgets 1..3.
TEST(Repair, CountingOverAllFailurePatterns) {
  for (int len = 0; len <= 6; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      for (int budget = 1; budget <= 3; ++budget) {
        std::vector<json> replies;
        for (int i = 0; i < len; ++i) {
          replies.push_back((mask >> i) & 1 ? ok_reply()
                                            : error_reply("E" + std::to_string(i), "m", i + 1));
        }
        replies.push_back(error_reply("Tail", "always"));
        RepairRig rig(replies);
        RepairConfig cfg;
        cfg.budget = budget;
        auto out = repair_loop("t", *rig.session.kernel, rig.primary, rig.secondary, cfg);

        int first_ok = -1;
        for (int i = 0; i < budget && i < len; ++i) {
          if ((mask >> i) & 1) {
            first_ok = i;
            break;
          }
        }
        SCOPED_TRACE("len=" + std::to_string(len) + " mask=" + std::to_string(mask) +
                     " budget=" + std::to_string(budget));
        EXPECT_LE(out.executions, budget + 1);
        EXPECT_EQ(out.executions, rig.session.kernel->executions());
        if (first_ok >= 0) {
          EXPECT_EQ(out.kind, OutcomeKind::Success);
          EXPECT_EQ(out.executions, first_ok + 1);
          EXPECT_EQ(rig.escalations(), 0u);
        } else {
          EXPECT_EQ(rig.escalations(), 1u);
          EXPECT_EQ(out.executions, budget + 1);
          const auto prompt = rig.secondary.requests().at(0).full_text();
          for (int i = 0; i < budget; ++i) {
            EXPECT_NE(prompt.find(render_traceback(*out.context.attempts[i].result.traceback)),
                      std::string::npos);
          }
        }
      }
    }
  }
}
