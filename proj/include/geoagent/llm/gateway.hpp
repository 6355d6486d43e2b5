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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace geoagent::llm {

using json = nlohmann::json;

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct ImagePart {
  std::vector<std::uint8_t> bytes;
  std::string media_type;

  friend bool operator==(const ImagePart&, const ImagePart&) = default;
};

using Part = std::variant<std::string, ImagePart>;

struct Message {
  Role role = Role::User;
  std::vector<Part> parts;

  static Message text(Role role, std::string body) {
    return Message{role, {Part{std::move(body)}}};
  }

  /// Text parts joined with newlines; image parts are skipped.
  std::string joined_text() const;
  bool has_images() const;

  friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
  std::string model_tag;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  std::optional<json> response_schema;

  /// All message text, in order, newline separated.
  std::string full_text() const;
};

struct Usage {
  int input_tokens = 0;
  int output_tokens = 0;

  friend bool operator==(const Usage&, const Usage&) = default;
};

struct ChatResponse {
  std::string text;
  std::optional<json> structured;
  Usage usage;
  std::string provider_id;

  friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

/// A model provider. Implementations must be safe to call from several
/// threads at once.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Raw provider call. No validation and no structured-output enforcement;
  /// use llm::complete() for that.
  virtual ChatResponse send(const ChatRequest& request) = 0;

  virtual bool supports_vision(std::string_view model_tag) const = 0;
  virtual std::string provider_id() const = 0;
};

using BackendHandle = std::shared_ptr<Backend>;

/// Validates the request, calls the backend, and enforces the response
/// schema when one is given. A reply that fails schema validation gets one
/// re-prompt carrying the parse error; a second failure throws
/// SchemaViolation.
ChatResponse complete(const ChatRequest& request, Backend& backend);

/// Throws InvalidArgument when the request breaks a ChatRequest invariant.
void validate_request(const ChatRequest& request, const Backend& backend);

/// Lower-case hex SHA-256 of the canonical serialization.
std::string digest(const ChatRequest& request);

/// Canonical form used by digest(): object keys sorted, images base64.
json canonical_json(const ChatRequest& request);

json to_json(const ChatResponse& response);
ChatResponse response_from_json(const json& value);

/// Rough provider-independent token estimate used when a backend does not
/// report usage: whitespace-separated words x 1.3, rounded up.
int estimate_tokens(std::string_view text);

/// Extracts the first JSON value from model text, accepting an optional
/// ```json fence around it.
std::optional<json> parse_json_reply(std::string_view text);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string sha256_hex(std::string_view data);

}  // namespace geoagent::llm
