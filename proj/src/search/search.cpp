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

#include "geoagent/search/search.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::search {

namespace {

using catalog::tokenize;
namespace q = catalog::q;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

bool covers(const std::set<std::string>& tokens, const std::string& text) {
  const auto need = tokenize(text);
  return !need.empty() && std::all_of(need.begin(), need.end(),
                                      [&](const std::string& t) { return tokens.count(t) > 0; });
}

bool facet_covered(const Facet& f, const std::set<std::string>& tokens) {
  return std::any_of(f.synonyms.begin(), f.synonyms.end(),
                     [&](const std::string& s) { return covers(tokens, s); });
}

std::set<std::string> token_set(const std::string& text) {
  auto t = tokenize(text);
  return {t.begin(), t.end()};
}

std::vector<BooleanQuery> filters(const QueryConstraints& c) {
  std::vector<BooleanQuery> out;
  if (c.geo) out.push_back(q::geo(*c.geo));
  if (c.time) out.push_back(q::time(*c.time));
  if (c.layout) out.push_back(q::layout(*c.layout));
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string describe(const DatasetMetadata& m) {
  std::ostringstream s;
  s << "- " << m.id << " | " << m.title << " | layout " << catalog::to_string(m.layout);
  if (m.geo) {
    s << " | lat " << m.geo->lat_min << ".." << m.geo->lat_max << " lon " << m.geo->lon_min
      << ".." << m.geo->lon_max;
  }
  if (m.time) s << " | " << format_instant(m.time->start) << ".." << format_instant(m.time->end);
  if (!m.parameters.empty()) {
    s << " | parameters:";
    for (std::size_t i = 0; i < m.parameters.size(); ++i) {
      s << (i ? ", " : " ") << m.parameters[i].name;
    }
  }
  return s.str();
}

// Unique ids with their best index score, ordered (score desc, id asc).
std::vector<std::pair<std::string, double>> best_hits(
    const std::vector<std::vector<ScoredHit>>& results) {
  std::map<std::string, double> best;
  for (const auto& list : results) {
    for (const auto& h : list) {
      auto [it, inserted] = best.emplace(h.dataset_id, h.score);
      if (!inserted) it->second = std::max(it->second, h.score);
    }
  }
  std::vector<std::pair<std::string, double>> out(best.begin(), best.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

void sort_entries(std::vector<RankedEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.relevance_score != b.relevance_score) return a.relevance_score > b.relevance_score;
    return a.dataset_id < b.dataset_id;
  });
}

RankedResults index_ranked(const std::vector<ScoredHit>& hits, const std::string& rationale) {
  RankedResults r;
  for (const auto& h : hits) r.entries.push_back({h.dataset_id, std::min(10.0, h.score), rationale});
  sort_entries(r.entries);
  r.queries_issued = 1;
  r.rounds = 1;
  return r;
}

}  // namespace

Relevance RuleScorer::score(const DatasetMetadata& m, const QueryConstraints& c) {
  int checks = 0, met = 0;
  if (c.geo) {
    ++checks;
    met += m.geo && c.geo->intersects(*m.geo);
  }
  if (c.time) {
    ++checks;
    met += m.time && c.time->overlaps(*m.time);
  }
  if (c.layout) {
    ++checks;
    met += m.layout == *c.layout;
  }
  for (const auto& p : c.required_parameters) {
    ++checks;
    met += std::any_of(m.parameters.begin(), m.parameters.end(),
                       [&](const catalog::Parameter& param) {
                         return covers(token_set(param.name), p);
                       });
  }
  std::set<std::string> title_params = token_set(m.title);
  for (const auto& p : m.parameters) {
    for (auto& t : tokenize(p.name)) title_params.insert(std::move(t));
  }
  const std::set<std::string> abstract = token_set(m.abstract.value_or(""));
  int in_title = 0, in_abstract = 0;
  for (const auto& f : c.facets) {
    in_title += facet_covered(f, title_params);
    in_abstract += facet_covered(f, abstract);
  }
  const double nf = static_cast<double>(c.facets.size());
  const double structure = checks ? 4.0 * met / checks : 4.0;
  const double title = c.facets.empty() ? 4.0 : 4.0 * in_title / nf;
  const double abs = c.facets.empty() ? 2.0 : 2.0 * in_abstract / nf;
  Relevance r;
  r.score = std::clamp(structure + title + abs, 0.0, 10.0);
  r.rationale = "constraints " + std::to_string(met) + "/" + std::to_string(checks) +
                ", facets in title/parameters " + std::to_string(in_title) + "/" +
                std::to_string(c.facets.size()) + ", in abstract " + std::to_string(in_abstract) +
                "/" + std::to_string(c.facets.size());
  return r;
}

Relevance ModelJudgeScorer::score(const DatasetMetadata& m, const QueryConstraints& c) {
  static const json schema = {
      {"type", "object"},
      {"required", {"score", "rationale"}},
      {"properties",
       {{"score", {{"type", "number"}, {"minimum", 0}, {"maximum", 10}}},
        {"rationale", {{"type", "string"}}}}},
      {"additionalProperties", false}};
  llm::ChatRequest req;
  req.model_tag = model_tag_;
  req.response_schema = schema;
  req.messages.push_back(llm::Message::text(
      llm::Role::System, std::string("You rate how well a dataset matches search constraints.\n") +
                             kJudgeMarker + "\nReply with JSON {score 0-10, rationale}."));
  req.messages.push_back(llm::Message::text(
      llm::Role::User, "Constraints:\n" + to_json(c).dump() + "\nDataset:\n" +
                           catalog::to_json(m).dump()));
  const auto reply = llm::complete(req, *backend_);
  return Relevance{reply.structured->at("score").get<double>(),
                   reply.structured->at("rationale").get<std::string>()};
}

QueryConstraints translate_intent(const std::string& nl_query, llm::Backend& backend,
                                  const std::string& model_tag, TranslateMode mode) {
  const std::string request = trim(nl_query);
  if (request.empty()) throw Error(ErrorCode::EmptyQuery, "search request is blank");
  std::string system =
      std::string("You translate dataset search requests into metadata constraints for a "
                  "geoscience data archive.\n") +
      kTranslateMarker + "\n" +
      (mode == TranslateMode::Inferential ? kInferentialMarker : kZeroShotMarker) + "\n";
  if (mode == TranslateMode::Inferential) {
    system +=
        "Decompose the intent into thematic facets with synonyms and structural filters. "
        "Resolve implicit boundary conditions: place names become bounding boxes, named "
        "periods and seasons become date ranges using the hemisphere of the region. Record "
        "every such resolution in derivation_notes.\n";
  } else {
    system += "Translate the request directly into facets and filters in a single pass.\n";
  }
  system += "Reply with one JSON object matching the response schema.";
  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.response_schema = constraints_schema();
  req.messages.push_back(llm::Message::text(llm::Role::System, system));
  req.messages.push_back(llm::Message::text(llm::Role::User, "Request: " + request));
  const auto reply = llm::complete(req, backend);
  QueryConstraints c = constraints_from_json(*reply.structured);
  c.validate();
  return c;
}

std::vector<BooleanQuery> expand_queries(const QueryConstraints& c, std::size_t cap,
                                         const std::vector<Field>& fields) {
  c.validate();
  if (cap == 0) throw Error(ErrorCode::InvalidArgument, "cap must be at least 1");
  if (fields.empty()) throw Error(ErrorCode::InvalidArgument, "no target fields");
  const auto filter_nodes = filters(c);
  std::vector<BooleanQuery> out;

  if (c.facets.empty()) {
    std::vector<BooleanQuery> children = filter_nodes;
    for (const auto& p : c.required_parameters) children.push_back(q::text(Field::Parameters, p));
    out.push_back(q::all(std::move(children)));
    return out;
  }

  // Mixed-radix enumeration: field is the fastest digit, then the last
  // facet's synonym, up to the first facet's synonym.
  std::size_t total = fields.size();
  for (const auto& f : c.facets) {
    if (total > cap) break;
    total *= f.synonyms.size();
  }
  const std::size_t n = std::min(total, cap);
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Field field = fields[k % fields.size()];
    std::size_t rest = k / fields.size();
    std::vector<std::size_t> pick(c.facets.size());
    for (std::size_t i = c.facets.size(); i-- > 0;) {
      pick[i] = rest % c.facets[i].synonyms.size();
      rest /= c.facets[i].synonyms.size();
    }
    std::vector<BooleanQuery> children;
    for (std::size_t i = 0; i < c.facets.size(); ++i) {
      children.push_back(q::text(field, c.facets[i].synonyms[pick[i]]));
    }
    children.insert(children.end(), filter_nodes.begin(), filter_nodes.end());
    out.push_back(q::all(std::move(children)));
  }
  return out;
}

std::vector<std::vector<ScoredHit>> execute_all(const Catalog& catalog,
                                                const std::vector<BooleanQuery>& queries,
                                                std::size_t limit) {
  std::vector<std::future<std::vector<ScoredHit>>> pending;
  pending.reserve(queries.size());
  for (const auto& query : queries) {
    pending.push_back(std::async(std::launch::async, [&catalog, &query, limit] {
      return catalog.execute_query(query, limit);
    }));
  }
  std::vector<std::vector<ScoredHit>> out;
  out.reserve(pending.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

AdequacyVerdict introspect(const std::vector<std::vector<ScoredHit>>& results,
                           const QueryConstraints& c, const Catalog& catalog,
                           llm::Backend& backend, const std::string& model_tag,
                           std::size_t max_candidates) {
  const auto candidates = best_hits(results);
  std::ostringstream user;
  user << "Constraints:\n" << to_json(c).dump() << "\n";
  if (candidates.empty()) {
    user << kZeroRecallMarker
         << ": no query returned any hits. Suggest broader synonyms or relaxed filters.\n";
  } else {
    user << "Top candidates (" << std::min(candidates.size(), max_candidates) << " of "
         << candidates.size() << "):\n";
    for (std::size_t i = 0; i < candidates.size() && i < max_candidates; ++i) {
      user << describe(catalog.get(candidates[i].first)) << " | index score "
           << fmt(candidates[i].second) << "\n";
    }
  }
  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.response_schema = verdict_schema();
  req.messages.push_back(llm::Message::text(
      llm::Role::System,
      std::string("You check whether retrieved dataset metadata satisfies every constraint of "
                  "the request.\n") +
          kIntrospectMarker +
          "\nReply with JSON {sufficient, missing, refinements}. Refinement ops: add_synonym, "
          "add_facet, drop_facet, add_parameter, set_geo, set_time, set_layout, clear_geo, "
          "clear_time."));
  req.messages.push_back(llm::Message::text(llm::Role::User, user.str()));
  return verdict_from_json(*llm::complete(req, backend).structured);
}

RankedResults consolidate(const std::vector<std::vector<ScoredHit>>& results,
                          const QueryConstraints& c, const Catalog& catalog,
                          RelevanceScorer& scorer) {
  std::set<std::string> ids;
  for (const auto& list : results) {
    for (const auto& h : list) ids.insert(h.dataset_id);
  }
  RankedResults out;
  for (const auto& id : ids) {
    Relevance r = scorer.score(catalog.get(id), c);
    out.entries.push_back({id, std::clamp(r.score, 0.0, 10.0), std::move(r.rationale)});
  }
  sort_entries(out.entries);
  return out;
}

bool drop_rarest_facet(QueryConstraints& c, const Catalog& catalog) {
  if (c.facets.size() <= 1) return false;
  std::size_t rarest = 0, rarest_df = 0;
  for (std::size_t i = 0; i < c.facets.size(); ++i) {
    std::size_t df = 0;
    for (const auto& s : c.facets[i].synonyms) {
      for (const auto& t : tokenize(s)) df += catalog.document_frequency(t);
    }
    if (i == 0 || df < rarest_df) {
      rarest = i;
      rarest_df = df;
    }
  }
  c.facets.erase(c.facets.begin() + static_cast<std::ptrdiff_t>(rarest));
  return true;
}

RankedResults agentic_search(const std::string& nl_query, const Catalog& catalog,
                             llm::Backend& backend, const SearchConfig& config,
                             RelevanceScorer& scorer, std::vector<RoundTrace>* trace) {
  if (config.max_rounds < 1) throw Error(ErrorCode::InvalidArgument, "max_rounds must be >= 1");
  QueryConstraints intent =
      translate_intent(nl_query, backend, config.model_tag, TranslateMode::Inferential);
  std::set<std::string> dropped;
  std::vector<std::vector<ScoredHit>> all_results;
  std::size_t issued = 0;
  int round = 0;
  while (round < config.max_rounds) {
    ++round;
    QueryConstraints exec = intent;
    std::erase_if(exec.facets, [&](const Facet& f) { return dropped.count(f.name) > 0; });
    if (exec.facets.empty() && !exec.has_structure()) exec = intent;

    const auto queries = expand_queries(exec, config.cap, config.fields);
    auto results = execute_all(catalog, queries, config.hits_per_query);
    issued += queries.size();
    std::size_t total = 0;
    for (const auto& r : results) total += r.size();

    RoundTrace rt{round, queries.size(), total, false, false};
    if (total == 0) {
      QueryConstraints broader = exec;
      if (drop_rarest_facet(broader, catalog)) {
        for (const auto& f : exec.facets) {
          if (std::none_of(broader.facets.begin(), broader.facets.end(),
                           [&](const Facet& g) { return g.name == f.name; })) {
            dropped.insert(f.name);
          }
        }
        rt.broadened = true;
      }
    }
    const AdequacyVerdict verdict =
        introspect(results, exec, catalog, backend, config.model_tag);
    all_results.insert(all_results.end(), std::make_move_iterator(results.begin()),
                       std::make_move_iterator(results.end()));
    rt.sufficient = verdict.sufficient;
    if (trace) trace->push_back(rt);
    if (verdict.sufficient) break;

    QueryConstraints refined = intent;
    for (const auto& r : verdict.refinements) apply_refinement(refined, r);
    try {
      refined.validate();
      intent = std::move(refined);
    } catch (const Error&) {
      // An edit that empties the constraints is ignored.
    }
  }
  RankedResults out = consolidate(all_results, intent, catalog, scorer);
  if (out.entries.size() > config.top_k) out.entries.resize(config.top_k);
  out.queries_issued = issued;
  out.rounds = round;
  return out;
}

RankedResults agentic_search(const std::string& nl_query, const Catalog& catalog,
                             llm::Backend& backend, const SearchConfig& config) {
  RuleScorer scorer;
  return agentic_search(nl_query, catalog, backend, config, scorer);
}

RankedResults baseline_search(const std::string& nl_query, const Catalog& catalog,
                              std::size_t top_k) {
  const BooleanQuery query = catalog::keyword_query(nl_query);
  if (std::holds_alternative<catalog::node::MatchNone>(query.node)) return RankedResults{};
  return index_ranked(catalog.execute_query(query, top_k), "keyword match");
}

RankedResults simple_llm_search(const std::string& nl_query, const Catalog& catalog,
                                llm::Backend& backend, std::size_t top_k,
                                const std::string& model_tag) {
  const QueryConstraints c =
      translate_intent(nl_query, backend, model_tag, TranslateMode::ZeroShot);
  const auto queries = expand_queries(c, 1);
  return index_ranked(catalog.execute_query(queries.front(), top_k), "single-pass translation");
}

}  // namespace geoagent::search
