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

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoagent/catalog/catalog.hpp"
#include "geoagent/llm/gateway.hpp"

namespace geoagent::search {

using catalog::BooleanQuery;
using catalog::Catalog;
using catalog::DatasetMetadata;
using catalog::Field;
using catalog::GeoBox;
using catalog::Layout;
using catalog::ScoredHit;
using catalog::TimeRange;
using nlohmann::json;

struct Facet {
  std::string name;
  std::vector<std::string> synonyms;

  friend bool operator==(const Facet&, const Facet&) = default;
};

/// Metadata constraints decomposed from a natural-language request.
struct QueryConstraints {
  std::vector<Facet> facets;
  std::optional<GeoBox> geo;
  std::optional<TimeRange> time;
  std::optional<Layout> layout;
  std::vector<std::string> required_parameters;
  std::vector<std::string> platform_hints;
  std::vector<std::string> derivation_notes;

  bool has_structure() const;
  /// Throws EmptyQuery when there is neither a facet nor a structural
  /// constraint; InvalidArgument for a facet without synonyms.
  void validate() const;

  friend bool operator==(const QueryConstraints&, const QueryConstraints&) = default;
};

json to_json(const QueryConstraints& c);
/// Synonyms that tokenize to nothing are dropped, then facets left without
/// synonyms. Throws SchemaViolation on malformed extents or dates.
QueryConstraints constraints_from_json(const json& value);
const json& constraints_schema();

enum class RefineOp {
  AddSynonym,
  AddFacet,
  DropFacet,
  AddParameter,
  SetGeo,
  SetTime,
  SetLayout,
  ClearGeo,
  ClearTime,
};

struct Refinement {
  RefineOp op = RefineOp::AddSynonym;
  std::string facet;
  std::string value;
  std::optional<GeoBox> geo;
  std::optional<TimeRange> time;
  std::optional<Layout> layout;
};

/// Edits referring to an unknown facet are ignored.
void apply_refinement(QueryConstraints& c, const Refinement& r);

struct AdequacyVerdict {
  bool sufficient = false;
  std::vector<std::string> missing;
  std::vector<Refinement> refinements;
};

AdequacyVerdict verdict_from_json(const json& value);
const json& verdict_schema();

struct RankedEntry {
  std::string dataset_id;
  double relevance_score = 0;  // [0, 10]
  std::string rationale;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedResults {
  std::vector<RankedEntry> entries;
  std::size_t queries_issued = 0;
  int rounds = 0;

  std::vector<std::string> ids() const;
};

json to_json(const RankedResults& r);

struct Relevance {
  double score = 0;
  std::string rationale;
};

class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual Relevance score(const DatasetMetadata& meta, const QueryConstraints& c) = 0;
};

/// Deterministic scorer: up to 4 points for the share of structural
/// constraints met (geo, time, layout, each required parameter), 4 for the
/// share of facets covered by title or parameter names, 2 for the share
/// covered by the abstract. A facet is covered when every token of one of
/// its synonyms is present.
class RuleScorer : public RelevanceScorer {
 public:
  Relevance score(const DatasetMetadata& meta, const QueryConstraints& c) override;
};

/// One schema-constrained model call per candidate.
class ModelJudgeScorer : public RelevanceScorer {
 public:
  ModelJudgeScorer(llm::BackendHandle backend, std::string model_tag)
      : backend_(std::move(backend)), model_tag_(std::move(model_tag)) {}

  Relevance score(const DatasetMetadata& meta, const QueryConstraints& c) override;

 private:
  llm::BackendHandle backend_;
  std::string model_tag_;
};

enum class TranslateMode {
  ZeroShot,     // single-pass translation
  Inferential,  // resolves implicit boundary conditions
};

/// Prompt lines a scripted backend can key on.
inline constexpr const char* kTranslateMarker = "Stage: translate";
inline constexpr const char* kZeroShotMarker = "Mode: zero-shot";
inline constexpr const char* kInferentialMarker = "Mode: inferential";
inline constexpr const char* kIntrospectMarker = "Stage: introspect";
inline constexpr const char* kZeroRecallMarker = "Zero recall";
inline constexpr const char* kJudgeMarker = "Stage: judge";

/// Throws EmptyQuery for a blank request or when the reply carries no usable
/// constraint; SchemaViolation propagates from the gateway.
QueryConstraints translate_intent(const std::string& nl_query, llm::Backend& backend,
                                  const std::string& model_tag,
                                  TranslateMode mode = TranslateMode::Inferential);

inline const std::vector<Field>& default_target_fields() {
  static const std::vector<Field> fields{Field::Title, Field::Abstract, Field::Parameters};
  return fields;
}

/// Cartesian product of one synonym per facet and one target field per
/// query, each conjoined with the geo/time/layout filters. Facet order,
/// then synonym order, then field order; truncated to `cap`.
std::vector<BooleanQuery> expand_queries(const QueryConstraints& c, std::size_t cap,
                                         const std::vector<Field>& fields = default_target_fields());

/// Runs every query concurrently; result i belongs to query i.
std::vector<std::vector<ScoredHit>> execute_all(const Catalog& catalog,
                                                const std::vector<BooleanQuery>& queries,
                                                std::size_t limit);

AdequacyVerdict introspect(const std::vector<std::vector<ScoredHit>>& results,
                           const QueryConstraints& c, const Catalog& catalog,
                           llm::Backend& backend, const std::string& model_tag,
                           std::size_t max_candidates = 8);

/// Dedups by id, scores each candidate, sorts by (score desc, id asc).
RankedResults consolidate(const std::vector<std::vector<ScoredHit>>& results,
                          const QueryConstraints& c, const Catalog& catalog,
                          RelevanceScorer& scorer);

/// Zero-hit broadening: removes the facet whose synonyms have the lowest
/// total document frequency. Returns false when only one facet is left.
bool drop_rarest_facet(QueryConstraints& c, const Catalog& catalog);

struct SearchConfig {
  int max_rounds = 3;
  std::size_t cap = 24;
  std::size_t top_k = 5;
  std::size_t hits_per_query = 50;
  std::string model_tag = "search";
  std::vector<Field> fields = default_target_fields();
};

struct RoundTrace {
  int round = 0;
  std::size_t queries = 0;
  std::size_t total_hits = 0;
  bool broadened = false;
  bool sufficient = false;
};

RankedResults agentic_search(const std::string& nl_query, const Catalog& catalog,
                             llm::Backend& backend, const SearchConfig& config,
                             RelevanceScorer& scorer, std::vector<RoundTrace>* trace = nullptr);
/// Uses a RuleScorer.
RankedResults agentic_search(const std::string& nl_query, const Catalog& catalog,
                             llm::Backend& backend, const SearchConfig& config = {});

RankedResults baseline_search(const std::string& nl_query, const Catalog& catalog,
                              std::size_t top_k = 5);

RankedResults simple_llm_search(const std::string& nl_query, const Catalog& catalog,
                                llm::Backend& backend, std::size_t top_k = 5,
                                const std::string& model_tag = "search");

}  // namespace geoagent::search
