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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geoagent/catalog/metadata.hpp"
#include "geoagent/time.hpp"
#include "json.hpp"

namespace geoagent::catalog {

/// Searchable text fields.
enum class Field { Title, Abstract, Parameters, Campaign, Platform };

inline constexpr Field kAllFields[] = {Field::Title, Field::Abstract, Field::Parameters,
                                       Field::Campaign, Field::Platform};

std::string_view to_string(Field field);
Field field_from_string(std::string_view text);

/// Closed latitude/longitude rectangle. Longitudes do not wrap.
struct GeoBox {
  double lat_min = -90, lat_max = 90;
  double lon_min = -180, lon_max = 180;

  bool intersects(const GeoExtent& extent) const;
  bool contains(double lat, double lon) const;

  friend bool operator==(const GeoBox&, const GeoBox&) = default;
};

/// Closed interval of instants.
struct TimeRange {
  Instant start;
  Instant end;

  bool overlaps(const TimeExtent& extent) const;

  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

enum class NumericField { SizeBytes, DepthM };

struct BooleanQuery;
using QueryPtr = std::shared_ptr<const BooleanQuery>;

namespace node {

struct Term {
  Field field;
  std::string token;
};
struct Phrase {
  Field field;
  std::vector<std::string> tokens;
};
struct All {
  std::vector<BooleanQuery> children;
};
struct Any {
  std::vector<BooleanQuery> children;
};
struct Not {
  QueryPtr child;
};
/// size_bytes within [lo, hi], or the record's depth extent overlapping it.
struct NumericRange {
  NumericField field;
  double lo;
  double hi;
};
struct GeoFilter {
  GeoBox box;
};
struct TimeFilter {
  TimeRange range;
};
struct LayoutIs {
  Layout layout;
};
/// Matches nothing; the form an empty keyword query takes.
struct MatchNone {};

}  // namespace node

/// Structured retrieval query. Term/Phrase clauses are scored; everything
/// else (ranges, boxes, layout, negation) is a hard filter.
struct BooleanQuery {
  std::variant<node::Term, node::Phrase, node::All, node::Any, node::Not, node::NumericRange,
               node::GeoFilter, node::TimeFilter, node::LayoutIs, node::MatchNone>
      node;
};

namespace q {

/// Term for a single token, Phrase when `text` tokenizes into several.
BooleanQuery text(Field field, std::string_view text);
BooleanQuery term(Field field, std::string_view token);
BooleanQuery phrase(Field field, std::vector<std::string> tokens);
BooleanQuery all(std::vector<BooleanQuery> children);
BooleanQuery any(std::vector<BooleanQuery> children);
BooleanQuery negate(BooleanQuery child);
BooleanQuery numeric(NumericField field, double lo, double hi);
BooleanQuery geo(GeoBox box);
BooleanQuery time(TimeRange range);
BooleanQuery layout(Layout layout);
BooleanQuery match_none();

}  // namespace q

/// Throws MalformedQuery: Not at the root, empty All/Any, terms that are not
/// single lower-case tokens, empty phrases, inverted ranges.
void validate(const BooleanQuery& query);

/// Lucene-flavoured rendering for prompts and logs.
std::string to_string(const BooleanQuery& query);

/// Baseline-tier query: Any over Term clauses for every token of `text`
/// against every textual field. MatchNone when `text` has no tokens.
BooleanQuery keyword_query(std::string_view text);

nlohmann::json to_json(const GeoBox& box);
GeoBox geobox_from_json(const nlohmann::json& value);
nlohmann::json to_json(const TimeRange& range);
TimeRange timerange_from_json(const nlohmann::json& value);

}  // namespace geoagent::catalog
