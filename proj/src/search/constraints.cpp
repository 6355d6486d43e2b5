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

#include <algorithm>

#include "geoagent/error.hpp"
#include "geoagent/search/search.hpp"

namespace geoagent::search {

namespace {

json string_array() { return {{"type", "array"}, {"items", {{"type", "string"}}}}; }

json geobox_schema() {
  json num = {{"type", "number"}};
  return {{"type", "object"},
          {"required", {"lat_min", "lat_max", "lon_min", "lon_max"}},
          {"properties", {{"lat_min", num}, {"lat_max", num}, {"lon_min", num}, {"lon_max", num}}},
          {"additionalProperties", false}};
}

json timerange_schema() {
  json str = {{"type", "string"}, {"minLength", 4}};
  return {{"type", "object"},
          {"required", {"start", "end"}},
          {"properties", {{"start", str}, {"end", str}}},
          {"additionalProperties", false}};
}

json layout_schema() { return {{"type", "string"}, {"enum", {"tabular", "gridded"}}}; }

GeoBox checked_geobox(const json& v) {
  GeoBox box = catalog::geobox_from_json(v);
  if (!(box.lat_min <= box.lat_max) || !(box.lon_min <= box.lon_max) || box.lat_min < -90 ||
      box.lat_max > 90 || box.lon_min < -180 || box.lon_max > 180) {
    throw Error(ErrorCode::SchemaViolation, "geo box out of range or inverted: " + v.dump());
  }
  return box;
}

TimeRange checked_timerange(const json& v) {
  try {
    TimeRange range = catalog::timerange_from_json(v);
    if (range.end < range.start) {
      throw Error(ErrorCode::SchemaViolation, "time range ends before it starts: " + v.dump());
    }
    return range;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaViolation) throw;
    throw Error(ErrorCode::SchemaViolation, std::string("bad time range: ") + e.what());
  }
}

std::vector<std::string> strings(const json& v, const char* key) {
  if (!v.contains(key)) return {};
  return v.at(key).get<std::vector<std::string>>();
}

bool has_tokens(const std::string& s) { return !catalog::tokenize(s).empty(); }

const std::pair<RefineOp, const char*> kOps[] = {
    {RefineOp::AddSynonym, "add_synonym"}, {RefineOp::AddFacet, "add_facet"},
    {RefineOp::DropFacet, "drop_facet"},   {RefineOp::AddParameter, "add_parameter"},
    {RefineOp::SetGeo, "set_geo"},         {RefineOp::SetTime, "set_time"},
    {RefineOp::SetLayout, "set_layout"},   {RefineOp::ClearGeo, "clear_geo"},
    {RefineOp::ClearTime, "clear_time"},
};

}  // namespace

bool QueryConstraints::has_structure() const {
  return geo || time || layout || !required_parameters.empty();
}

void QueryConstraints::validate() const {
  for (const auto& f : facets) {
    if (f.synonyms.empty()) {
      throw Error(ErrorCode::InvalidArgument, "facet '" + f.name + "' has no synonyms");
    }
  }
  if (facets.empty() && !has_structure()) {
    throw Error(ErrorCode::EmptyQuery, "no facet and no structural constraint");
  }
}

json to_json(const QueryConstraints& c) {
  json facets = json::array();
  for (const auto& f : c.facets) facets.push_back({{"name", f.name}, {"synonyms", f.synonyms}});
  json out = {{"facets", facets},
              {"required_parameters", c.required_parameters},
              {"platform_hints", c.platform_hints},
              {"derivation_notes", c.derivation_notes}};
  if (c.geo) out["geo"] = catalog::to_json(*c.geo);
  if (c.time) out["time"] = catalog::to_json(*c.time);
  if (c.layout) out["layout"] = std::string(catalog::to_string(*c.layout));
  return out;
}

const json& constraints_schema() {
  static const json schema = {
      {"type", "object"},
      {"required", {"facets"}},
      {"properties",
       {{"facets",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"name", "synonyms"}},
            {"properties",
             {{"name", {{"type", "string"}}},
              {"synonyms",
               {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "string"}}}}}}},
            {"additionalProperties", false}}}}},
        {"geo", geobox_schema()},
        {"time", timerange_schema()},
        {"layout", layout_schema()},
        {"required_parameters", string_array()},
        {"platform_hints", string_array()},
        {"derivation_notes", string_array()}}},
      {"additionalProperties", false}};
  return schema;
}

QueryConstraints constraints_from_json(const json& v) {
  QueryConstraints c;
  try {
    for (const auto& f : v.at("facets")) {
      Facet facet{f.at("name").get<std::string>(), {}};
      for (const auto& s : f.at("synonyms")) {
        auto syn = s.get<std::string>();
        if (has_tokens(syn)) facet.synonyms.push_back(std::move(syn));
      }
      if (!facet.synonyms.empty()) c.facets.push_back(std::move(facet));
    }
    if (v.contains("geo")) c.geo = checked_geobox(v.at("geo"));
    if (v.contains("time")) c.time = checked_timerange(v.at("time"));
    if (v.contains("layout")) c.layout = catalog::layout_from_string(v.at("layout").get<std::string>());
    c.required_parameters = strings(v, "required_parameters");
    std::erase_if(c.required_parameters, [](const std::string& p) { return !has_tokens(p); });
    c.platform_hints = strings(v, "platform_hints");
    c.derivation_notes = strings(v, "derivation_notes");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("constraints: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) {
      throw Error(ErrorCode::SchemaViolation, std::string("constraints: ") + e.what());
    }
    throw;
  }
  return c;
}

void apply_refinement(QueryConstraints& c, const Refinement& r) {
  auto facet = std::find_if(c.facets.begin(), c.facets.end(),
                            [&](const Facet& f) { return f.name == r.facet; });
  switch (r.op) {
    case RefineOp::AddSynonym:
      if (facet != c.facets.end() && has_tokens(r.value) &&
          std::find(facet->synonyms.begin(), facet->synonyms.end(), r.value) ==
              facet->synonyms.end()) {
        facet->synonyms.push_back(r.value);
      }
      break;
    case RefineOp::AddFacet:
      if (facet == c.facets.end() && has_tokens(r.value)) c.facets.push_back({r.facet, {r.value}});
      break;
    case RefineOp::DropFacet:
      if (facet != c.facets.end()) c.facets.erase(facet);
      break;
    case RefineOp::AddParameter:
      if (has_tokens(r.value) && std::find(c.required_parameters.begin(),
                                           c.required_parameters.end(),
                                           r.value) == c.required_parameters.end()) {
        c.required_parameters.push_back(r.value);
      }
      break;
    case RefineOp::SetGeo:
      if (r.geo) c.geo = r.geo;
      break;
    case RefineOp::SetTime:
      if (r.time) c.time = r.time;
      break;
    case RefineOp::SetLayout:
      if (r.layout) c.layout = r.layout;
      break;
    case RefineOp::ClearGeo:
      c.geo.reset();
      break;
    case RefineOp::ClearTime:
      c.time.reset();
      break;
  }
}

const json& verdict_schema() {
  static const json schema = [] {
    json ops = json::array();
    for (const auto& [op, name] : kOps) ops.push_back(name);
    return json{
        {"type", "object"},
        {"required", {"sufficient"}},
        {"properties",
         {{"sufficient", {{"type", "boolean"}}},
          {"missing", string_array()},
          {"refinements",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required", {"op"}},
              {"properties",
               {{"op", {{"type", "string"}, {"enum", ops}}},
                {"facet", {{"type", "string"}}},
                {"value", {{"type", "string"}}},
                {"geo", geobox_schema()},
                {"time", timerange_schema()},
                {"layout", layout_schema()}}},
              {"additionalProperties", false}}}}}}},
        {"additionalProperties", false}};
  }();
  return schema;
}

AdequacyVerdict verdict_from_json(const json& v) {
  AdequacyVerdict verdict;
  try {
    verdict.sufficient = v.at("sufficient").get<bool>();
    verdict.missing = strings(v, "missing");
    if (v.contains("refinements")) {
      for (const auto& item : v.at("refinements")) {
        Refinement r;
        const auto op = item.at("op").get<std::string>();
        auto it = std::find_if(std::begin(kOps), std::end(kOps),
                               [&](const auto& p) { return op == p.second; });
        if (it == std::end(kOps)) throw Error(ErrorCode::SchemaViolation, "unknown op " + op);
        r.op = it->first;
        r.facet = item.value("facet", std::string{});
        r.value = item.value("value", std::string{});
        if (item.contains("geo")) r.geo = checked_geobox(item.at("geo"));
        if (item.contains("time")) r.time = checked_timerange(item.at("time"));
        if (item.contains("layout")) {
          r.layout = catalog::layout_from_string(item.at("layout").get<std::string>());
        }
        verdict.refinements.push_back(std::move(r));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("verdict: ") + e.what());
  }
  if (verdict.sufficient && !verdict.missing.empty()) {
    throw Error(ErrorCode::SchemaViolation, "verdict is sufficient but lists missing constraints");
  }
  return verdict;
}

std::vector<std::string> RankedResults::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.dataset_id);
  return out;
}

json to_json(const RankedResults& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"dataset_id", e.dataset_id},
                       {"relevance_score", e.relevance_score},
                       {"rationale", e.rationale}});
  }
  return {{"entries", entries}, {"queries_issued", r.queries_issued}, {"rounds", r.rounds}};
}

}  // namespace geoagent::search
