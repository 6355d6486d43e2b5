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

#include <chrono>
#include <string>
#include <string_view>

namespace geoagent {

/// UTC instant at one-second resolution.
using Instant = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" or "YYYY-MM-DDTHH:MM:SSZ".
/// Throws Error(ParseError) on anything else.
Instant parse_instant(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_instant(Instant t);

/// Truncates to 00:00:00 UTC of the same day.
inline Instant floor_day(Instant t) {
  return std::chrono::floor<std::chrono::days>(t);
}

inline Instant now_utc() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

inline double to_epoch_seconds(Instant t) {
  return static_cast<double>(t.time_since_epoch().count());
}

}  // namespace geoagent
