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

#include <optional>
#include <string>

#include "json.hpp"

namespace geoagent::llm {

/// Checks `value` against the subset of JSON Schema the internal prompts
/// use: type (string or list), properties, required, additionalProperties
/// (boolean), items, enum, minimum, maximum, minItems, maxItems, minLength.
/// Returns the first violation found as "path: reason", or nullopt.
std::optional<std::string> validate_schema(const nlohmann::json& value,
                                           const nlohmann::json& schema);

}  // namespace geoagent::llm
