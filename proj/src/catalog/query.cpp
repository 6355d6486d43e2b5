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

#include "geoagent/catalog/query.hpp"

#include <set>
#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::catalog {

using json = nlohmann::json;

std::string_view to_string(Field field) {
  switch (field) {
    case Field::Title: return "title";
    case Field::Abstract: return "abstract";
    case Field::Parameters: return "parameters";
    case Field::Campaign: return "campaign";
    case Field::Platform: return "platform";
  }
  return "title";
}

Field field_from_string(std::string_view text) {
  for (Field f : kAllFields) {
    if (to_string(f) == text) return f;
  }
  throw Error(ErrorCode::MalformedQuery, "unknown field '" + std::string(text) + "'");
}

bool GeoBox::intersects(const GeoExtent& e) const {
  return e.lat_min <= lat_max && lat_min <= e.lat_max && e.lon_min <= lon_max &&
         lon_min <= e.lon_max;
}

bool GeoBox::contains(double lat, double lon) const {
  return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
}

bool TimeRange::overlaps(const TimeExtent& e) const {
  return e.start <= end && start <= e.end;
}

namespace q {

BooleanQuery term(Field field, std::string_view token) {
  auto tokens = tokenize(token);
  return BooleanQuery{node::Term{field, tokens.size() == 1 ? tokens[0] : std::string(token)}};
}

BooleanQuery phrase(Field field, std::vector<std::string> tokens) {
  return BooleanQuery{node::Phrase{field, std::move(tokens)}};
}

BooleanQuery text(Field field, std::string_view text) {
  auto tokens = tokenize(text);
  if (tokens.size() == 1) return BooleanQuery{node::Term{field, tokens[0]}};
  return phrase(field, std::move(tokens));
}

BooleanQuery all(std::vector<BooleanQuery> children) {
  return BooleanQuery{node::All{std::move(children)}};
}

BooleanQuery any(std::vector<BooleanQuery> children) {
  return BooleanQuery{node::Any{std::move(children)}};
}

BooleanQuery negate(BooleanQuery child) {
  return BooleanQuery{node::Not{std::make_shared<const BooleanQuery>(std::move(child))}};
}

BooleanQuery numeric(NumericField field, double lo, double hi) {
  return BooleanQuery{node::NumericRange{field, lo, hi}};
}

BooleanQuery geo(GeoBox box) { return BooleanQuery{node::GeoFilter{box}}; }
BooleanQuery time(TimeRange range) { return BooleanQuery{node::TimeFilter{range}}; }
BooleanQuery layout(Layout layout) { return BooleanQuery{node::LayoutIs{layout}}; }
BooleanQuery match_none() { return BooleanQuery{node::MatchNone{}}; }

}  // namespace q

namespace {

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::MalformedQuery, why);
}

void check_token(const std::string& token) {
  auto tokens = tokenize(token);
  if (tokens.size() != 1 || tokens[0] != token) {
    malformed("'" + token + "' is not a single normalized token");
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate_node(const BooleanQuery& query) {
  std::visit(overloaded{
                 [](const node::Term& t) { check_token(t.token); },
                 [](const node::Phrase& p) {
                   if (p.tokens.empty()) malformed("empty phrase");
                   for (const auto& t : p.tokens) check_token(t);
                 },
                 [](const node::All& a) {
                   if (a.children.empty()) malformed("All with no children");
                   for (const auto& c : a.children) validate_node(c);
                 },
                 [](const node::Any& a) {
                   if (a.children.empty()) malformed("Any with no children");
                   for (const auto& c : a.children) validate_node(c);
                 },
                 [](const node::Not& n) {
                   if (!n.child) malformed("Not without child");
                   validate_node(*n.child);
                 },
                 [](const node::NumericRange& r) {
                   if (!(r.lo <= r.hi)) malformed("numeric range inverted");
                 },
                 [](const node::GeoFilter& g) {
                   const auto& b = g.box;
                   if (!(b.lat_min <= b.lat_max) || !(b.lon_min <= b.lon_max) ||
                       b.lat_min < -90 || b.lat_max > 90 || b.lon_min < -180 ||
                       b.lon_max > 180) {
                     malformed("geo box invalid");
                   }
                 },
                 [](const node::TimeFilter& t) {
                   if (t.range.start > t.range.end) malformed("time range inverted");
                 },
                 [](const node::LayoutIs&) {},
                 [](const node::MatchNone&) {},
             },
             query.node);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void validate(const BooleanQuery& query) {
  if (std::holds_alternative<node::Not>(query.node)) malformed("Not cannot be the root");
  validate_node(query);
}

std::string to_string(const BooleanQuery& query) {
  return std::visit(
      overloaded{
          [](const node::Term& t) { return std::string(to_string(t.field)) + ":" + t.token; },
          [](const node::Phrase& p) {
            std::string out = std::string(to_string(p.field)) + ":\"";
            for (std::size_t i = 0; i < p.tokens.size(); ++i) {
              out += (i ? " " : "") + p.tokens[i];
            }
            return out + "\"";
          },
          [](const node::All& a) {
            std::string out = "(";
            for (std::size_t i = 0; i < a.children.size(); ++i) {
              out += (i ? " AND " : "") + to_string(a.children[i]);
            }
            return out + ")";
          },
          [](const node::Any& a) {
            std::string out = "(";
            for (std::size_t i = 0; i < a.children.size(); ++i) {
              out += (i ? " OR " : "") + to_string(a.children[i]);
            }
            return out + ")";
          },
          [](const node::Not& n) { return "NOT " + to_string(*n.child); },
          [](const node::NumericRange& r) {
            return std::string(r.field == NumericField::SizeBytes ? "size_bytes" : "depth_m") +
                   ":[" + fmt_double(r.lo) + " TO " + fmt_double(r.hi) + "]";
          },
          [](const node::GeoFilter& g) {
            return "geo:[" + fmt_double(g.box.lat_min) + "," + fmt_double(g.box.lon_min) +
                   " TO " + fmt_double(g.box.lat_max) + "," + fmt_double(g.box.lon_max) + "]";
          },
          [](const node::TimeFilter& t) {
            return "time:[" + format_instant(t.range.start) + " TO " +
                   format_instant(t.range.end) + "]";
          },
          [](const node::LayoutIs& l) { return "layout:" + std::string(to_string(l.layout)); },
          [](const node::MatchNone&) { return std::string("MATCH_NONE"); },
      },
      query.node);
}

BooleanQuery keyword_query(std::string_view text) {
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (auto& token : tokenize(text)) {
    if (seen.insert(token).second) unique.push_back(std::move(token));
  }
  if (unique.empty()) return q::match_none();
  std::vector<BooleanQuery> clauses;
  for (const auto& token : unique) {
    for (Field f : kAllFields) clauses.push_back(BooleanQuery{node::Term{f, token}});
  }
  return q::any(std::move(clauses));
}

json to_json(const GeoBox& box) {
  return {{"lat_min", box.lat_min}, {"lat_max", box.lat_max},
          {"lon_min", box.lon_min}, {"lon_max", box.lon_max}};
}

GeoBox geobox_from_json(const json& v) {
  return GeoBox{v.at("lat_min").get<double>(), v.at("lat_max").get<double>(),
                v.at("lon_min").get<double>(), v.at("lon_max").get<double>()};
}

json to_json(const TimeRange& range) {
  return {{"start", format_instant(range.start)}, {"end", format_instant(range.end)}};
}

TimeRange timerange_from_json(const json& v) {
  return TimeRange{parse_instant(v.at("start").get<std::string>()),
                   parse_instant(v.at("end").get<std::string>())};
}

}  // namespace geoagent::catalog
