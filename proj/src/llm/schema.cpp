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

#include "geoagent/llm/schema.hpp"

#include <string_view>

namespace geoagent::llm {

namespace {

using json = nlohmann::json;

bool matches_type(const json& value, std::string_view type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    if (value.is_number_float()) {
      const double d = value.get<double>();
      return d == static_cast<double>(static_cast<long long>(d));
    }
    return false;
  }
  if (type == "number") return value.is_number();
  return false;
}

std::optional<std::string> check(const json& value, const json& schema,
                                 const std::string& path) {
  if (!schema.is_object()) return std::nullopt;

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = matches_type(value, it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) {
        if (t.is_string() && matches_type(value, t.get<std::string>())) ok = true;
      }
    }
    if (!ok) return path + ": expected type " + it->dump();
  }

  if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    bool found = false;
    for (const auto& candidate : *it) {
      if (candidate == value) found = true;
    }
    if (!found) return path + ": value " + value.dump() + " not in enum";
  }

  if (value.is_number()) {
    const double d = value.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && d < it->get<double>()) {
      return path + ": below minimum " + it->dump();
    }
    if (auto it = schema.find("maximum"); it != schema.end() && d > it->get<double>()) {
      return path + ": above maximum " + it->dump();
    }
  }

  if (value.is_string()) {
    if (auto it = schema.find("minLength");
        it != schema.end() && value.get<std::string>().size() < it->get<std::size_t>()) {
      return path + ": shorter than minLength " + it->dump();
    }
  }

  if (value.is_object()) {
    if (auto it = schema.find("required"); it != schema.end() && it->is_array()) {
      for (const auto& key : *it) {
        if (!value.contains(key.get<std::string>())) {
          return path + ": missing required property '" + key.get<std::string>() + "'";
        }
      }
    }
    const auto props = schema.find("properties");
    const auto extra = schema.find("additionalProperties");
    for (const auto& [key, child] : value.items()) {
      const std::string child_path = path + "." + key;
      if (props != schema.end() && props->contains(key)) {
        if (auto err = check(child, (*props)[key], child_path)) return err;
      } else if (extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
        return child_path + ": unexpected property";
      }
    }
  }

  if (value.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && value.size() < it->get<std::size_t>()) {
      return path + ": fewer than " + it->dump() + " items";
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && value.size() > it->get<std::size_t>()) {
      return path + ": more than " + it->dump() + " items";
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (auto err = check(value[i], *it, path + "[" + std::to_string(i) + "]")) return err;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_schema(const json& value, const json& schema) {
  return check(value, schema, "$");
}

}  // namespace geoagent::llm
