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

#include <atomic>
#include <filesystem>
#include <thread>

#include "geoagent/error.hpp"
#include "geoagent/llm/backends.hpp"
#include "geoagent/llm/gateway.hpp"
#include "httplib.h"

namespace fs = std::filesystem;
using namespace geoagent;
using namespace geoagent::llm;

namespace {

ChatRequest text_request(std::string text, std::string model = "m") {
  ChatRequest r;
  r.model_tag = std::move(model);
  r.messages.push_back(Message::text(Role::User, std::move(text)));
  return r;
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "geoagent_llm_test";
  fs::create_directories(dir);
  auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST(ScriptedBackend, DirectRuleMatch) {
  ScriptedBackend backend;
  backend.add_rule({"ping"}, "pong");
  auto response = complete(text_request("ping"), backend);
  EXPECT_EQ(response.text, "pong");
  EXPECT_EQ(response.provider_id, "scripted");
  EXPECT_FALSE(response.structured.has_value());
}

TEST(ScriptedBackend, FirstRegisteredRuleWins) {
  ScriptedBackend backend;
  backend.add_rule({"ping"}, "A");
  backend.add_rule({"ping"}, "B");
  EXPECT_EQ(complete(text_request("ping"), backend).text, "A");
}

TEST(ScriptedBackend, NoMatchSignalsFixtureGap) {
  ScriptedBackend backend;
  backend.add_rule({"ping"}, "pong");
  try {
    complete(text_request("hello"), backend);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoMatchingScript);
  }
}

TEST(ScriptedBackend, ConsumeOnceFallsThroughToNextRule) {
  ScriptedBackend backend;
  backend.add_rule({"q"}, "first", /*consume_once=*/true);
  backend.add_rule({"q"}, "rest");
  EXPECT_EQ(complete(text_request("q"), backend).text, "first");
  EXPECT_EQ(complete(text_request("q"), backend).text, "rest");
  EXPECT_EQ(complete(text_request("q"), backend).text, "rest");
}

TEST(ScriptedBackend, RoleFilterRestrictsHaystack) {
  ScriptedBackend backend;
  ScriptRule rule;
  rule.contains = {"marker"};
  rule.role = Role::System;
  rule.response.text = "system-hit";
  backend.add_rule(rule);
  backend.add_rule({"marker"}, "any-hit");
  EXPECT_EQ(complete(text_request("marker"), backend).text, "any-hit");
  ChatRequest r = text_request("x");
  r.messages.insert(r.messages.begin(), Message::text(Role::System, "marker"));
  EXPECT_EQ(complete(r, backend).text, "system-hit");
}

TEST(ScriptedBackend, PureFunctionWithoutConsumption) {
  ScriptedBackend backend;
  backend.add_rule({"a"}, "same");
  auto first = complete(text_request("a b"), backend);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(complete(text_request("a b"), backend), first);
}

TEST(ScriptedBackend, ConsumeOnceIsAtomicAcrossThreads) {
  ScriptedBackend backend;
  for (int i = 0; i < 64; ++i) backend.add_rule({"go"}, std::to_string(i), true);
  std::vector<std::thread> threads;
  std::mutex mu;
  std::set<std::string> seen;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 8; ++i) {
        auto text = complete(text_request("go"), backend).text;
        std::lock_guard lock(mu);
        seen.insert(text);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(seen.size(), 64u);
}

TEST(Validation, RejectsEmptyMessagesAndBadTemperature) {
  ScriptedBackend backend;
  ChatRequest empty;
  empty.model_tag = "m";
  EXPECT_THROW(complete(empty, backend), Error);
  auto hot = text_request("x");
  hot.temperature = 2.5;
  EXPECT_THROW(complete(hot, backend), Error);
}

TEST(Validation, ImagesOnlyForVisionModels) {
  ScriptedBackend backend;
  backend.set_vision_models({"vlm"});
  backend.add_rule({"look"}, "seen");
  ChatRequest r = text_request("look", "text-only");
  r.messages[0].parts.push_back(ImagePart{{1, 2, 3}, "image/png"});
  EXPECT_THROW(complete(r, backend), Error);
  r.model_tag = "vlm";
  EXPECT_EQ(complete(r, backend).text, "seen");
}

TEST(StructuredOutput, ParsesFencedJsonFromText) {
  ScriptedBackend backend;
  backend.add_rule({"give"}, "```json\n{\"a\": 1}\n```");
  auto r = text_request("give");
  r.response_schema = json{{"type", "object"}, {"required", {"a"}}};
  auto response = complete(r, backend);
  ASSERT_TRUE(response.structured.has_value());
  EXPECT_EQ((*response.structured)["a"], 1);
}

TEST(StructuredOutput, OneRepromptCarryingTheParseError) {
  ScriptedBackend backend;
  backend.add_rule({"did not match the required JSON schema"}, "{\"a\": 2}");
  backend.add_rule({"give"}, "not json at all");
  auto r = text_request("give");
  r.response_schema = json{{"type", "object"}, {"required", {"a"}}};
  auto response = complete(r, backend);
  EXPECT_EQ((*response.structured)["a"], 2);
  ASSERT_EQ(backend.request_count(), 2u);
  EXPECT_NE(backend.requests()[1].full_text().find("reply is not valid JSON"),
            std::string::npos);
}

TEST(StructuredOutput, SecondFailureIsSchemaViolation) {
  ScriptedBackend backend;
  backend.add_rule({"give"}, "{\"b\": 1}");
  auto r = text_request("give");
  r.response_schema = json{{"type", "object"}, {"required", {"a"}}};
  try {
    complete(r, backend);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
  }
  EXPECT_EQ(backend.request_count(), 2u);
}

TEST(Digest, MatchesCanonicalSerializationOracle) {
  // Expected values: sha256 of the key-sorted compact JSON produced by an
  // independent serializer (Python json.dumps(sort_keys=True)).
  auto r = text_request("ping");
  r.response_schema = json::parse(R"({"type":"object","required":["a"]})");
  EXPECT_EQ(digest(r), "73cc717f29cd9cf20091ae9daa58b90d73ded03a334bcfbf45268bf3fe6fe017");

  ChatRequest image;
  image.model_tag = "vlm";
  image.temperature = 0.5;
  image.max_output_tokens = 100;
  image.messages.push_back(Message{Role::User,
                                   {Part{std::string("look")},
                                    Part{ImagePart{{0x89, 0x50, 0x4e, 0x47, 1, 2, 3}, "image/png"}}}});
  EXPECT_EQ(digest(image), "c4defc2020960494c4298de913411d2a6a1d350362f8401b77ae7586c7bdf39b");
}

TEST(Digest, InsensitiveToKeyOrderSensitiveToContent) {
  auto a = text_request("ping");
  auto b = text_request("ping");
  a.response_schema = json::parse(R"({"type":"object","required":["x"],"properties":{}})");
  b.response_schema = json::parse(R"({"properties":{},"required":["x"],"type":"object"})");
  EXPECT_EQ(digest(a), digest(b));

  EXPECT_NE(digest(text_request("ping")), digest(text_request("pinG")));
  EXPECT_NE(digest(text_request("ping", "m1")), digest(text_request("ping", "m2")));
  auto warm = text_request("ping");
  warm.temperature = 0.1;
  EXPECT_NE(digest(text_request("ping")), digest(warm));

  auto img1 = text_request("x"), img2 = text_request("x");
  img1.messages[0].parts.push_back(ImagePart{{1, 2, 3}, "image/png"});
  img2.messages[0].parts.push_back(ImagePart{{1, 2, 4}, "image/png"});
  EXPECT_NE(digest(img1), digest(img2));
}

TEST(Cassette, RecordThenReplayIsByteIdentical) {
  auto path = temp_file("roundtrip.jsonl");
  auto scripted = std::make_shared<ScriptedBackend>();
  scripted->add_rule({"one"}, "first-1", true);
  scripted->add_rule({"one"}, "first-2");
  scripted->add_structured_rule({"two"}, json{{"k", "v"}});

  std::vector<ChatRequest> sequence = {text_request("one"), text_request("two"),
                                       text_request("one")};
  sequence[1].response_schema = json{{"type", "object"}};
  std::vector<ChatResponse> recorded;
  {
    RecordingBackend recorder(scripted, path);
    for (const auto& r : sequence) recorded.push_back(complete(r, recorder));
  }
  ReplayBackend replay(path);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    auto replayed = complete(sequence[i], replay);
    EXPECT_EQ(to_json(replayed).dump(), to_json(recorded[i]).dump()) << i;
  }
}

TEST(Cassette, MissingDigestIsProviderUnreachableNamingDigest) {
  auto path = temp_file("empty.jsonl");
  { std::ofstream(path) << ""; }
  ReplayBackend replay(path);
  auto r = text_request("never recorded");
  try {
    complete(r, replay);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderUnreachable);
    EXPECT_NE(std::string(e.what()).find(digest(r)), std::string::npos);
  }
}

TEST(HttpBackend, TalksToCompatibleEndpoint) {
  httplib::Server server;
  std::atomic<bool> saw_key{false};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    saw_key = req.get_header_value("Authorization") == "Bearer secret-key";
    auto body = json::parse(req.body);
    json reply = {{"choices", {{{"message", {{"content", "echo:" + body["model"].get<std::string>()}}}}}},
                  {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 2}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("GATEWAY_PRIMARY_KEY", "secret-key", 1);
  ProviderConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port);
  config.key_env = "GATEWAY_PRIMARY_KEY";
  HttpBackend backend(config);
  auto response = complete(text_request("hi", "model-x"), backend);
  EXPECT_EQ(response.text, "echo:model-x");
  EXPECT_EQ(response.usage.output_tokens, 2);
  EXPECT_TRUE(saw_key);
  server.stop();
  thread.join();
}

TEST(HttpBackend, UnreachableEndpoint) {
  ProviderConfig config;
  config.base_url = "http://127.0.0.1:1";
  HttpBackend backend(config);
  try {
    complete(text_request("hi"), backend);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderUnreachable);
  }
}

TEST(Tokens, EstimateRoundsUp) {
  EXPECT_EQ(estimate_tokens(""), 0);
  EXPECT_EQ(estimate_tokens("one"), 2);          // 1.3 -> 2
  EXPECT_EQ(estimate_tokens("a b c d e f g h i j"), 13);
}

TEST(Base64, RoundTrip) {
  std::vector<std::uint8_t> bytes;
  for (int n = 0; n < 20; ++n) {
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
    bytes.push_back(static_cast<std::uint8_t>(n * 37));
  }
}
