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

#include <cstdlib>

#include "geoagent/error.hpp"
#include "geoagent/llm/backends.hpp"
#include "httplib.h"

namespace geoagent::llm {

HttpBackend::HttpBackend(ProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::InvalidArgument, "provider base_url is empty");
  }
}

bool HttpBackend::supports_vision(std::string_view model_tag) const {
  return config_.vision_models.count(std::string(model_tag)) > 0;
}

ChatResponse HttpBackend::send(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& message : request.messages) {
    json content = json::array();
    for (const auto& part : message.parts) {
      if (const auto* text = std::get_if<std::string>(&part)) {
        content.push_back({{"type", "text"}, {"text", *text}});
      } else {
        const auto& image = std::get<ImagePart>(part);
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:" + image.media_type + ";base64," + base64_encode(image.bytes)}}}});
      }
    }
    messages.push_back({{"role", to_string(message.role)}, {"content", content}});
  }
  json body = {{"model", request.model_tag},
               {"messages", messages},
               {"temperature", request.temperature},
               {"max_tokens", request.max_output_tokens}};
  if (request.response_schema) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", "reply"}, {"schema", *request.response_schema}}}};
  }

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(config_.timeout_s);
  httplib::Headers headers;
  if (!config_.key_env.empty()) {
    if (const char* key = std::getenv(config_.key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  auto result = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::ProviderUnreachable,
                config_.base_url + ": " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::ProviderUnreachable,
                config_.base_url + " answered HTTP " + std::to_string(result->status));
  }
  json reply = json::parse(result->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
    throw Error(ErrorCode::ProviderUnreachable, config_.base_url + " sent a malformed reply");
  }
  ChatResponse out;
  const auto& content = reply["choices"][0]["message"]["content"];
  out.text = content.is_string() ? content.get<std::string>() : content.dump();
  if (auto usage = reply.find("usage"); usage != reply.end()) {
    out.usage.input_tokens = usage->value("prompt_tokens", 0);
    out.usage.output_tokens = usage->value("completion_tokens", 0);
  }
  out.provider_id = provider_id();
  return out;
}

}  // namespace geoagent::llm
