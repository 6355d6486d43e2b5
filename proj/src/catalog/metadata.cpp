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

#include "geoagent/catalog/metadata.hpp"

#include <fstream>
#include <set>

#include "geoagent/error.hpp"

namespace geoagent::catalog {

using json = nlohmann::json;

std::string_view to_string(Layout layout) {
  return layout == Layout::Gridded ? "gridded" : "tabular";
}

Layout layout_from_string(std::string_view text) {
  if (text == "gridded") return Layout::Gridded;
  if (text == "tabular") return Layout::Tabular;
  throw Error(ErrorCode::ParseError, "unknown layout '" + std::string(text) + "'");
}

void DatasetMetadata::validate() const {
  auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidArgument, "dataset " + id + ": " + what);
  };
  if (id.empty()) bad("empty id");
  if (geo) {
    if (geo->lat_min < -90 || geo->lat_max > 90 || geo->lat_min > geo->lat_max) {
      bad("latitude extent invalid");
    }
    if (geo->lon_min < -180 || geo->lon_max > 180 || geo->lon_min > geo->lon_max) {
      bad("longitude extent invalid");
    }
  }
  if (time && time->start > time->end) bad("time extent inverted");
  if (depth && (depth->min_m < 0 || depth->min_m > depth->max_m)) bad("depth extent invalid");
}

unsigned FeatureFlags::bits() const {
  return (has_geo ? 1u : 0u) | (is_gridded ? 2u : 0u) | (has_depth_axis ? 4u : 0u) |
         (is_large ? 8u : 0u) | (has_time ? 16u : 0u);
}

FeatureFlags FeatureFlags::from_bits(unsigned bits) {
  return FeatureFlags{(bits & 1u) != 0, (bits & 2u) != 0, (bits & 4u) != 0,
                      (bits & 8u) != 0, (bits & 16u) != 0};
}

FeatureFlags derive_feature_flags(const DatasetMetadata& meta,
                                  std::uint64_t size_threshold_bytes) {
  if (size_threshold_bytes == 0) {
    throw Error(ErrorCode::InvalidArgument, "size threshold must be positive");
  }
  return FeatureFlags{meta.geo.has_value(), meta.layout == Layout::Gridded,
                      meta.depth.has_value(), meta.size_bytes > size_threshold_bytes,
                      meta.time.has_value()};
}

json to_json(const FeatureFlags& flags) {
  return {{"has_geo", flags.has_geo},
          {"is_gridded", flags.is_gridded},
          {"has_depth_axis", flags.has_depth_axis},
          {"is_large", flags.is_large},
          {"has_time", flags.has_time}};
}

json to_json(const DatasetMetadata& meta) {
  json out = {{"id", meta.id}, {"title", meta.title}};
  if (meta.abstract) out["abstract"] = *meta.abstract;
  json params = json::array();
  for (const auto& p : meta.parameters) params.push_back({{"name", p.name}, {"unit", p.unit}});
  out["parameters"] = params;
  if (meta.campaign) out["campaign"] = *meta.campaign;
  if (meta.platform) out["platform"] = *meta.platform;
  if (meta.geo) {
    out["geo"] = {{"lat_min", meta.geo->lat_min}, {"lat_max", meta.geo->lat_max},
                  {"lon_min", meta.geo->lon_min}, {"lon_max", meta.geo->lon_max}};
  }
  if (meta.time) {
    out["time"] = {{"start", format_instant(meta.time->start)},
                   {"end", format_instant(meta.time->end)}};
  }
  if (meta.depth) out["depth"] = {{"min_m", meta.depth->min_m}, {"max_m", meta.depth->max_m}};
  out["layout"] = to_string(meta.layout);
  out["size_bytes"] = meta.size_bytes;
  return out;
}

namespace {

void reject_unknown(const json& object, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!object.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  for (const auto& [key, _] : object.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::ParseError, where + ": unknown field '" + key + "'");
    }
  }
}

}  // namespace

DatasetMetadata metadata_from_json(const json& value) {
  reject_unknown(value,
                 {"id", "title", "abstract", "parameters", "campaign", "platform", "geo",
                  "time", "depth", "layout", "size_bytes"},
                 "record");
  DatasetMetadata meta;
  try {
    meta.id = value.at("id").get<std::string>();
    meta.title = value.at("title").get<std::string>();
    if (value.contains("abstract")) meta.abstract = value["abstract"].get<std::string>();
    if (value.contains("parameters")) {
      for (const auto& p : value["parameters"]) {
        reject_unknown(p, {"name", "unit"}, "parameter");
        meta.parameters.push_back({p.at("name").get<std::string>(), p.value("unit", "")});
      }
    }
    if (value.contains("campaign")) meta.campaign = value["campaign"].get<std::string>();
    if (value.contains("platform")) meta.platform = value["platform"].get<std::string>();
    if (value.contains("geo")) {
      const auto& g = value["geo"];
      reject_unknown(g, {"lat_min", "lat_max", "lon_min", "lon_max"}, "geo");
      meta.geo = GeoExtent{g.at("lat_min").get<double>(), g.at("lat_max").get<double>(),
                           g.at("lon_min").get<double>(), g.at("lon_max").get<double>()};
    }
    if (value.contains("time")) {
      const auto& t = value["time"];
      reject_unknown(t, {"start", "end"}, "time");
      meta.time = TimeExtent{parse_instant(t.at("start").get<std::string>()),
                             parse_instant(t.at("end").get<std::string>())};
    }
    if (value.contains("depth")) {
      const auto& d = value["depth"];
      reject_unknown(d, {"min_m", "max_m"}, "depth");
      meta.depth = DepthExtent{d.at("min_m").get<double>(), d.at("max_m").get<double>()};
    }
    meta.layout = layout_from_string(value.value("layout", std::string{"tabular"}));
    meta.size_bytes = value.value("size_bytes", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("record: ") + e.what());
  }
  try {
    meta.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return meta;
}

std::vector<DatasetMetadata> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
  std::vector<DatasetMetadata> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json value = json::parse(line, nullptr, false);
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (value.is_discarded()) throw Error(ErrorCode::ParseError, where + ": invalid JSON");
    try {
      out.push_back(metadata_from_json(value));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                      (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : raw;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace geoagent::catalog
