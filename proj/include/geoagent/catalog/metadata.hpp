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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoagent/time.hpp"
#include "json.hpp"

namespace geoagent::catalog {

enum class Layout { Tabular, Gridded };

std::string_view to_string(Layout layout);
Layout layout_from_string(std::string_view text);

struct Parameter {
  std::string name;
  std::string unit;

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct GeoExtent {
  double lat_min = 0, lat_max = 0;
  double lon_min = 0, lon_max = 0;

  friend bool operator==(const GeoExtent&, const GeoExtent&) = default;
};

struct TimeExtent {
  Instant start;
  Instant end;

  friend bool operator==(const TimeExtent&, const TimeExtent&) = default;
};

struct DepthExtent {
  double min_m = 0;
  double max_m = 0;

  friend bool operator==(const DepthExtent&, const DepthExtent&) = default;
};

/// One archive record.
struct DatasetMetadata {
  std::string id;
  std::string title;
  std::optional<std::string> abstract;
  std::vector<Parameter> parameters;
  std::optional<std::string> campaign;
  std::optional<std::string> platform;
  std::optional<GeoExtent> geo;
  std::optional<TimeExtent> time;
  std::optional<DepthExtent> depth;
  Layout layout = Layout::Tabular;
  std::uint64_t size_bytes = 0;

  /// Throws InvalidArgument when an extent is inverted or out of range.
  void validate() const;

  friend bool operator==(const DatasetMetadata&, const DatasetMetadata&) = default;
};

/// The five binary descriptors that drive routing.
struct FeatureFlags {
  bool has_geo = false;
  bool is_gridded = false;
  bool has_depth_axis = false;
  bool is_large = false;
  bool has_time = false;

  /// Packs the flags into bits 0..4 in declaration order.
  unsigned bits() const;
  static FeatureFlags from_bits(unsigned bits);

  friend bool operator==(const FeatureFlags&, const FeatureFlags&) = default;
};

inline constexpr std::uint64_t kDefaultLargeThresholdBytes = 1ull << 30;

/// is_large uses a strict comparison: a record exactly at the threshold is
/// not large.
FeatureFlags derive_feature_flags(const DatasetMetadata& meta,
                                  std::uint64_t size_threshold_bytes = kDefaultLargeThresholdBytes);

nlohmann::json to_json(const DatasetMetadata& meta);
nlohmann::json to_json(const FeatureFlags& flags);

/// Strict reader: unknown fields anywhere in the record are a ParseError.
DatasetMetadata metadata_from_json(const nlohmann::json& value);

/// Reads a corpus fixture: one JSON record per line, blank lines ignored.
std::vector<DatasetMetadata> load_corpus(const std::filesystem::path& path);

/// Lower-cases and splits on ASCII non-alphanumerics. Bytes >= 0x80 are
/// kept inside tokens so UTF-8 words survive intact. No stemming.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace geoagent::catalog
