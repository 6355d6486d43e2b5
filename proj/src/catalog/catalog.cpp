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

#include "geoagent/catalog/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <mutex>

#include "geoagent/error.hpp"

namespace geoagent::catalog {

namespace {

unsigned bit(Field f) { return 1u << static_cast<unsigned>(f); }

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::size_t> unite(const std::vector<std::size_t>& a,
                               const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains_run(const std::vector<std::string>& seq, const std::vector<std::string>& run) {
  if (run.size() > seq.size()) return false;
  return std::search(seq.begin(), seq.end(), run.begin(), run.end()) != seq.end();
}

}  // namespace

std::string Catalog::ingest(DatasetMetadata meta) {
  meta.validate();
  Doc doc;
  auto add_segment = [&](Field f, const std::string& text) {
    doc.segments[f].push_back(tokenize(text));
  };
  add_segment(Field::Title, meta.title);
  if (meta.abstract) add_segment(Field::Abstract, *meta.abstract);
  for (const auto& p : meta.parameters) add_segment(Field::Parameters, p.name);
  if (meta.campaign) add_segment(Field::Campaign, *meta.campaign);
  if (meta.platform) add_segment(Field::Platform, *meta.platform);

  std::unordered_map<std::string, unsigned> masks;
  for (const auto& [field, segments] : doc.segments) {
    for (const auto& segment : segments) {
      for (const auto& token : segment) {
        ++doc.term_freq[token];
        ++doc.length;
        masks[token] |= bit(field);
      }
    }
  }
  doc.meta = std::move(meta);
  const std::string id = doc.meta.id;

  std::unique_lock lock(mu_);
  if (by_id_.count(id)) throw Error(ErrorCode::DuplicateId, "dataset '" + id + "' already ingested");
  const std::size_t index = docs_.size();
  for (const auto& [token, mask] : masks) postings_[token].push_back(Posting{index, mask});
  total_length_ += doc.length;
  docs_.push_back(std::move(doc));
  by_id_.emplace(id, index);
  return id;
}

std::optional<DatasetMetadata> Catalog::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return docs_[it->second].meta;
}

DatasetMetadata Catalog::get(const std::string& id) const {
  auto meta = find(id);
  if (!meta) throw Error(ErrorCode::UnknownId, "no dataset '" + id + "'");
  return *meta;
}

std::size_t Catalog::size() const {
  std::shared_lock lock(mu_);
  return docs_.size();
}

std::vector<std::string> Catalog::ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  out.reserve(docs_.size());
  for (const auto& d : docs_) out.push_back(d.meta.id);
  return out;
}

std::size_t Catalog::document_frequency(const std::string& token) const {
  std::shared_lock lock(mu_);
  auto it = postings_.find(token);
  return it == postings_.end() ? 0 : it->second.size();
}

Catalog::DocSet Catalog::term_docs(Field field, const std::string& token) const {
  DocSet out;
  auto it = postings_.find(token);
  if (it == postings_.end()) return out;
  for (const auto& posting : it->second) {
    if (posting.field_mask & bit(field)) out.push_back(posting.doc);
  }
  return out;  // postings are appended in doc order, so already sorted
}

Catalog::DocSet Catalog::phrase_docs(Field field, const std::vector<std::string>& tokens) const {
  DocSet candidates = term_docs(field, tokens.front());
  for (std::size_t i = 1; i < tokens.size() && !candidates.empty(); ++i) {
    candidates = intersect(candidates, term_docs(field, tokens[i]));
  }
  DocSet out;
  for (std::size_t d : candidates) {
    auto seg = docs_[d].segments.find(field);
    if (seg == docs_[d].segments.end()) continue;
    for (const auto& segment : seg->second) {
      if (contains_run(segment, tokens)) {
        out.push_back(d);
        break;
      }
    }
  }
  return out;
}

Catalog::DocSet Catalog::filter_docs(const BooleanQuery& query) const {
  DocSet out;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    const auto& meta = docs_[d].meta;
    bool keep = false;
    if (const auto* r = std::get_if<node::NumericRange>(&query.node)) {
      if (r->field == NumericField::SizeBytes) {
        const double size = static_cast<double>(meta.size_bytes);
        keep = size >= r->lo && size <= r->hi;
      } else {
        keep = meta.depth && meta.depth->min_m <= r->hi && r->lo <= meta.depth->max_m;
      }
    } else if (const auto* g = std::get_if<node::GeoFilter>(&query.node)) {
      keep = meta.geo && g->box.intersects(*meta.geo);
    } else if (const auto* t = std::get_if<node::TimeFilter>(&query.node)) {
      keep = meta.time && t->range.overlaps(*meta.time);
    } else if (const auto* l = std::get_if<node::LayoutIs>(&query.node)) {
      keep = meta.layout == l->layout;
    }
    if (keep) out.push_back(d);
  }
  return out;
}

Catalog::DocSet Catalog::evaluate(const BooleanQuery& query) const {
  if (const auto* t = std::get_if<node::Term>(&query.node)) return term_docs(t->field, t->token);
  if (const auto* p = std::get_if<node::Phrase>(&query.node)) {
    return phrase_docs(p->field, p->tokens);
  }
  if (const auto* a = std::get_if<node::All>(&query.node)) {
    DocSet acc = evaluate(a->children.front());
    for (std::size_t i = 1; i < a->children.size() && !acc.empty(); ++i) {
      acc = intersect(acc, evaluate(a->children[i]));
    }
    return acc;
  }
  if (const auto* a = std::get_if<node::Any>(&query.node)) {
    DocSet acc;
    for (const auto& child : a->children) acc = unite(acc, evaluate(child));
    return acc;
  }
  if (const auto* n = std::get_if<node::Not>(&query.node)) {
    const DocSet excluded = evaluate(*n->child);
    DocSet out;
    std::size_t j = 0;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      while (j < excluded.size() && excluded[j] < d) ++j;
      if (j < excluded.size() && excluded[j] == d) continue;
      out.push_back(d);
    }
    return out;
  }
  if (std::holds_alternative<node::MatchNone>(query.node)) return {};
  return filter_docs(query);
}

double Catalog::bm25(const Doc& doc, const std::string& token) const {
  auto tf_it = doc.term_freq.find(token);
  if (tf_it == doc.term_freq.end()) return 0.0;
  const double n = static_cast<double>(docs_.size());
  const double df = static_cast<double>(postings_.at(token).size());
  const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
  const double avgdl = static_cast<double>(total_length_) / n;
  const double tf = tf_it->second;
  const double norm = params_.k1 * (1.0 - params_.b + params_.b * doc.length / avgdl);
  return idf * tf * (params_.k1 + 1.0) / (tf + norm);
}

void Catalog::score_leaves(const BooleanQuery& query, bool positive,
                           std::map<std::size_t, ScoredHit>& hits) const {
  auto credit = [&](Field field, const DocSet& docs, const std::vector<std::string>& tokens) {
    for (std::size_t d : docs) {
      auto it = hits.find(d);
      if (it == hits.end()) continue;
      for (const auto& token : tokens) it->second.score += bm25(docs_[d], token);
      it->second.matched_fields.insert(field);
    }
  };
  if (const auto* t = std::get_if<node::Term>(&query.node)) {
    if (positive) credit(t->field, term_docs(t->field, t->token), {t->token});
  } else if (const auto* p = std::get_if<node::Phrase>(&query.node)) {
    if (positive) credit(p->field, phrase_docs(p->field, p->tokens), p->tokens);
  } else if (const auto* a = std::get_if<node::All>(&query.node)) {
    for (const auto& c : a->children) score_leaves(c, positive, hits);
  } else if (const auto* a = std::get_if<node::Any>(&query.node)) {
    for (const auto& c : a->children) score_leaves(c, positive, hits);
  } else if (const auto* n = std::get_if<node::Not>(&query.node)) {
    score_leaves(*n->child, false, hits);
  }
}

std::vector<ScoredHit> Catalog::execute_query(const BooleanQuery& query,
                                              std::size_t limit) const {
  if (limit == 0) throw Error(ErrorCode::InvalidArgument, "limit must be positive");
  validate(query);
  std::shared_lock lock(mu_);
  const DocSet matched = evaluate(query);
  std::map<std::size_t, ScoredHit> hits;
  for (std::size_t d : matched) hits.emplace(d, ScoredHit{docs_[d].meta.id, 0.0, {}});
  score_leaves(query, true, hits);

  std::vector<ScoredHit> out;
  out.reserve(hits.size());
  for (auto& [_, hit] : hits) out.push_back(std::move(hit));
  std::sort(out.begin(), out.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.dataset_id < b.dataset_id;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

}  // namespace geoagent::catalog
