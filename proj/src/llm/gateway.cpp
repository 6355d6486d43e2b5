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

#include "geoagent/llm/gateway.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <sstream>

#include "geoagent/error.hpp"
#include "geoagent/llm/schema.hpp"

namespace geoagent::llm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

Role role_from_string(std::string_view text) {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  if (text == "tool") return Role::Tool;
  throw Error(ErrorCode::ParseError, "unknown role '" + std::string(text) + "'");
}

std::string Message::joined_text() const {
  std::string out;
  for (const auto& part : parts) {
    if (const auto* text = std::get_if<std::string>(&part)) {
      if (!out.empty()) out += '\n';
      out += *text;
    }
  }
  return out;
}

bool Message::has_images() const {
  for (const auto& part : parts) {
    if (std::holds_alternative<ImagePart>(part)) return true;
  }
  return false;
}

std::string ChatRequest::full_text() const {
  std::string out;
  for (const auto& message : messages) {
    if (!out.empty()) out += '\n';
    out += message.joined_text();
  }
  return out;
}

int estimate_tokens(std::string_view text) {
  long words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return static_cast<int>((words * 13 + 9) / 10);
}

std::string sha256_hex(std::string_view data) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[out[i] >> 4];
    hex += kHex[out[i] & 0xF];
  }
  return hex;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) {
    throw Error(ErrorCode::ParseError, "base64 length not a multiple of 4");
  }
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::ParseError, "invalid base64");
  std::size_t padding = 0;
  if (text.back() == '=') ++padding;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

json canonical_json(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& message : request.messages) {
    json parts = json::array();
    for (const auto& part : message.parts) {
      if (const auto* text = std::get_if<std::string>(&part)) {
        parts.push_back({{"text", *text}});
      } else {
        const auto& image = std::get<ImagePart>(part);
        parts.push_back({{"image", {{"media_type", image.media_type},
                                    {"data", base64_encode(image.bytes)}}}});
      }
    }
    messages.push_back({{"role", to_string(message.role)}, {"parts", parts}});
  }
  // nlohmann::json keeps object keys in a std::map, so dump() is key-sorted
  // regardless of how the schema was built.
  json out = {{"model_tag", request.model_tag},
              {"messages", messages},
              {"temperature", request.temperature},
              {"max_output_tokens", request.max_output_tokens}};
  out["response_schema"] = request.response_schema ? json(*request.response_schema)
                                                   : json(nullptr);
  return out;
}

std::string digest(const ChatRequest& request) {
  return sha256_hex(canonical_json(request).dump());
}

json to_json(const ChatResponse& response) {
  json out = {{"text", response.text},
              {"usage", {{"input_tokens", response.usage.input_tokens},
                         {"output_tokens", response.usage.output_tokens}}},
              {"provider_id", response.provider_id}};
  if (response.structured) out["structured"] = *response.structured;
  return out;
}

ChatResponse response_from_json(const json& value) {
  ChatResponse out;
  out.text = value.value("text", std::string{});
  if (auto it = value.find("structured"); it != value.end() && !it->is_null()) {
    out.structured = *it;
  }
  if (auto it = value.find("usage"); it != value.end()) {
    out.usage.input_tokens = it->value("input_tokens", 0);
    out.usage.output_tokens = it->value("output_tokens", 0);
  }
  out.provider_id = value.value("provider_id", std::string{});
  return out;
}

std::optional<json> parse_json_reply(std::string_view text) {
  std::string_view body = text;
  if (auto fence = body.find("```"); fence != std::string_view::npos) {
    auto start = body.find('\n', fence);
    auto end = start == std::string_view::npos ? start : body.find("```", start);
    if (start != std::string_view::npos && end != std::string_view::npos) {
      body = body.substr(start + 1, end - start - 1);
    }
  }
  auto parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

void validate_request(const ChatRequest& request, const Backend& backend) {
  if (request.messages.empty()) {
    throw Error(ErrorCode::InvalidArgument, "chat request has no messages");
  }
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "temperature outside [0,2]");
  }
  if (request.max_output_tokens <= 0) {
    throw Error(ErrorCode::InvalidArgument, "max_output_tokens must be positive");
  }
  for (const auto& message : request.messages) {
    if (message.has_images() && !backend.supports_vision(request.model_tag)) {
      throw Error(ErrorCode::InvalidArgument,
                  "model '" + request.model_tag + "' does not accept images");
    }
  }
}

namespace {

// Returns the parse/validation error, or nullopt after filling `structured`.
std::optional<std::string> enforce_schema(ChatResponse& response, const json& schema) {
  std::optional<json> value = response.structured;
  if (!value) value = parse_json_reply(response.text);
  if (!value) return std::string("reply is not valid JSON");
  if (auto err = validate_schema(*value, schema)) return err;
  response.structured = std::move(value);
  return std::nullopt;
}

}  // namespace

ChatResponse complete(const ChatRequest& request, Backend& backend) {
  validate_request(request, backend);
  ChatResponse response = backend.send(request);
  if (!request.response_schema) {
    response.structured.reset();
    return response;
  }
  auto err = enforce_schema(response, *request.response_schema);
  if (!err) return response;

  ChatRequest retry = request;
  retry.messages.push_back(Message::text(Role::Assistant, response.text));
  retry.messages.push_back(Message::text(
      Role::User, "Your previous reply did not match the required JSON schema (" +
                      *err + "). Reply again with a single JSON value only."));
  ChatResponse second = backend.send(retry);
  if (auto err2 = enforce_schema(second, *request.response_schema)) {
    throw Error(ErrorCode::SchemaViolation,
                "structured output rejected twice; last error: " + *err2);
  }
  return second;
}

}  // namespace geoagent::llm
