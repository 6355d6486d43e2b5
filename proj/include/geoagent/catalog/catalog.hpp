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
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "geoagent/catalog/metadata.hpp"
#include "geoagent/catalog/query.hpp"

namespace geoagent::catalog {

struct ScoredHit {
  std::string dataset_id;
  double score = 0;
  std::set<Field> matched_fields;

  friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// In-memory archive index. Documents for BM25 are the concatenation of
/// title, abstract, parameter names, campaign and platform.
///
/// Reads may run concurrently; ingest takes an exclusive lock.
class Catalog {
 public:
  explicit Catalog(Bm25Params params = {}) : params_(params) {}

  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  /// Throws DuplicateId when the id is already present.
  std::string ingest(DatasetMetadata meta);

  std::optional<DatasetMetadata> find(const std::string& id) const;
  /// Throws UnknownId.
  DatasetMetadata get(const std::string& id) const;

  /// Hits ordered by (score desc, dataset_id asc), at most `limit` of them.
  std::vector<ScoredHit> execute_query(const BooleanQuery& query, std::size_t limit) const;

  std::size_t size() const;
  std::vector<std::string> ids() const;
  std::size_t document_frequency(const std::string& token) const;

 private:
  struct Doc {
    DatasetMetadata meta;
    // Token sequences per field; Parameters holds one segment per name.
    std::map<Field, std::vector<std::vector<std::string>>> segments;
    std::unordered_map<std::string, int> term_freq;
    int length = 0;
  };

  struct Posting {
    std::size_t doc;
    unsigned field_mask;
  };

  using DocSet = std::vector<std::size_t>;

  DocSet evaluate(const BooleanQuery& query) const;
  DocSet term_docs(Field field, const std::string& token) const;
  DocSet phrase_docs(Field field, const std::vector<std::string>& tokens) const;
  DocSet filter_docs(const BooleanQuery& query) const;
  void score_leaves(const BooleanQuery& query, bool positive,
                    std::map<std::size_t, ScoredHit>& hits) const;
  double bm25(const Doc& doc, const std::string& token) const;

  Bm25Params params_;
  mutable std::shared_mutex mu_;
  std::vector<Doc> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  long total_length_ = 0;
};

}  // namespace geoagent::catalog
