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

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "geoagent/catalog/catalog.hpp"
#include "geoagent/error.hpp"
#include "support/query_oracle.hpp"

using namespace geoagent;
using namespace geoagent::catalog;

namespace {

DatasetMetadata record(std::string id, std::string title) {
  DatasetMetadata m;
  m.id = std::move(id);
  m.title = std::move(title);
  return m;
}

std::set<std::string> id_set(const std::vector<ScoredHit>& hits) {
  std::set<std::string> out;
  for (const auto& h : hits) out.insert(h.dataset_id);
  return out;
}

}  // namespace

TEST(FeatureFlags, GriddedWithEverything) {
  DatasetMetadata m = record("a", "t");
  m.layout = Layout::Gridded;
  m.geo = GeoExtent{-70, -60, -50, 10};
  m.depth = DepthExtent{0, 500};
  m.time = TimeExtent{parse_instant("2018-01-01"), parse_instant("2019-01-01")};
  m.size_bytes = 2ull << 30;
  EXPECT_EQ(derive_feature_flags(m, 1ull << 30), (FeatureFlags{true, true, true, true, true}));
  m.time.reset();
  EXPECT_EQ(derive_feature_flags(m, 1ull << 30), (FeatureFlags{true, true, true, true, false}));
}

TEST(FeatureFlags, FlatTableAllFalse) {
  DatasetMetadata m = record("a", "t");
  m.size_bytes = 1024;
  EXPECT_EQ(derive_feature_flags(m), FeatureFlags{});
}

TEST(FeatureFlags, ThresholdIsStrict) {
  DatasetMetadata m = record("a", "t");
  m.size_bytes = 1ull << 30;
  EXPECT_FALSE(derive_feature_flags(m).is_large);
  m.size_bytes += 1;
  EXPECT_TRUE(derive_feature_flags(m).is_large);
}

TEST(FeatureFlags, BitsRoundTripAllCombinations) {
  for (unsigned b = 0; b < 32; ++b) EXPECT_EQ(FeatureFlags::from_bits(b).bits(), b);
}

TEST(Ingest, RoundTripAndDuplicate) {
  Catalog catalog;
  DatasetMetadata m = record("10.1594/PANGAEA.941076", "Weddell microplastic");
  m.parameters = {{"Microplastic abundance", "items/km2"}};
  catalog.ingest(m);
  EXPECT_EQ(catalog.get(m.id), m);
  try {
    catalog.ingest(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
  }
}

TEST(Ingest, SharedTokensRetrievableByTerm) {
  Catalog catalog;
  catalog.ingest(record("a", "Weddell Sea salinity"));
  catalog.ingest(record("b", "weddell gyre"));
  auto hits = catalog.execute_query(q::term(Field::Title, "weddell"), 10);
  EXPECT_EQ(id_set(hits), (std::set<std::string>{"a", "b"}));
}

TEST(Query, SingleRecordTermMatch) {
  Catalog catalog;
  catalog.ingest(record("x", "weddell microplastic"));
  auto hits = catalog.execute_query(q::term(Field::Title, "weddell"), 5);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].dataset_id, "x");
  EXPECT_EQ(hits[0].matched_fields, std::set<Field>{Field::Title});
  EXPECT_GE(hits[0].score, 0.0);
}

TEST(Query, NegationExcludes) {
  Catalog catalog;
  catalog.ingest(record("x", "weddell microplastic"));
  auto query = q::all({q::term(Field::Title, "microplastic"),
                       q::negate(q::term(Field::Title, "weddell"))});
  EXPECT_TRUE(catalog.execute_query(query, 5).empty());
}

TEST(Query, MalformedRejected) {
  Catalog catalog;
  catalog.ingest(record("x", "t"));
  auto expect_malformed = [&](const BooleanQuery& query) {
    try {
      catalog.execute_query(query, 5);
      FAIL() << to_string(query);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedQuery);
    }
  };
  expect_malformed(q::negate(q::term(Field::Title, "t")));
  expect_malformed(q::all({}));
  expect_malformed(q::any({}));
  expect_malformed(BooleanQuery{node::Term{Field::Title, "Two Words"}});
  expect_malformed(q::geo({10, -10, 0, 1}));
}

TEST(Query, PhraseRequiresContiguity) {
  Catalog catalog;
  catalog.ingest(record("a", "sea surface temperature"));
  catalog.ingest(record("b", "temperature of the sea surface"));
  auto hits = catalog.execute_query(q::text(Field::Title, "sea surface temperature"), 5);
  EXPECT_EQ(id_set(hits), std::set<std::string>{"a"});
}

TEST(Query, PhraseDoesNotSpanParameterNames) {
  Catalog catalog;
  DatasetMetadata m = record("a", "t");
  m.parameters = {{"Sea", ""}, {"Ice thickness", "m"}};
  catalog.ingest(m);
  EXPECT_TRUE(catalog.execute_query(q::text(Field::Parameters, "sea ice"), 5).empty());
  EXPECT_EQ(catalog.execute_query(q::text(Field::Parameters, "ice thickness"), 5).size(), 1u);
}

TEST(Query, StructuralFiltersIntersectAndOverlap) {
  Catalog catalog;
  DatasetMetadata a = record("a", "x");
  a.geo = GeoExtent{-78, -60, -57, 12};
  a.time = TimeExtent{parse_instant("2018-01-01"), parse_instant("2018-03-01")};
  DatasetMetadata b = record("b", "x");
  b.geo = GeoExtent{78, 80, 0, 5};
  catalog.ingest(a);
  catalog.ingest(b);
  auto box = q::geo({-65, -50, 0, 20});
  EXPECT_EQ(id_set(catalog.execute_query(box, 5)), std::set<std::string>{"a"});
  auto range = q::time({parse_instant("2018-02-28"), parse_instant("2019-01-01")});
  EXPECT_EQ(id_set(catalog.execute_query(range, 5)), std::set<std::string>{"a"});
  auto later = q::time({parse_instant("2018-03-02"), parse_instant("2019-01-01")});
  EXPECT_TRUE(catalog.execute_query(later, 5).empty());
}

TEST(Query, LimitAndTieBreak) {
  Catalog catalog;
  for (const char* id : {"c", "a", "b"}) catalog.ingest(record(id, "identical text"));
  auto hits = catalog.execute_query(q::term(Field::Title, "identical"), 2);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].dataset_id, "a");
  EXPECT_EQ(hits[1].dataset_id, "b");
  EXPECT_DOUBLE_EQ(hits[0].score, hits[1].score);
}

TEST(KeywordQuery, Shapes) {
  auto q3 = keyword_query("weddell sea winter");
  auto* any = std::get_if<node::Any>(&q3.node);
  ASSERT_NE(any, nullptr);
  EXPECT_EQ(any->children.size(), 3u * 5u);
  EXPECT_TRUE(std::holds_alternative<node::MatchNone>(keyword_query("").node));
  EXPECT_TRUE(std::holds_alternative<node::MatchNone>(keyword_query("?! -- ...").node));
}

TEST(Query, TwentyRecordCorpusMatchesLinearScan) {
  std::mt19937 rng(20);
  std::vector<DatasetMetadata> corpus;
  Catalog catalog;
  for (int i = 0; i < 20; ++i) {
    corpus.push_back(oracle::random_record(rng, i));
    catalog.ingest(corpus.back());
  }
  auto query = q::any({q::term(Field::Title, "weddell"), q::term(Field::Abstract, "ice"),
                       q::term(Field::Title, "ctd")});
  auto hits = catalog.execute_query(query, 100);

  oracle::Bm25Oracle bm25(corpus);
  std::vector<std::pair<double, std::string>> expected;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (oracle::matches(corpus[d], query)) expected.push_back({-bm25.score(d, query), corpus[d].id});
  }
  std::sort(expected.begin(), expected.end());
  ASSERT_EQ(hits.size(), expected.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    EXPECT_EQ(hits[i].dataset_id, expected[i].second);
    EXPECT_NEAR(hits[i].score, -expected[i].first, 1e-9);
  }
}

TEST(Query, RandomizedIdSetsAndScoresMatchOracle) {
  std::mt19937 rng(7);
  for (int round = 0; round < 30; ++round) {
    std::vector<DatasetMetadata> corpus;
    Catalog catalog;
    const int n = 1 + static_cast<int>(rng() % 150);
    for (int i = 0; i < n; ++i) {
      corpus.push_back(oracle::random_record(rng, i));
      catalog.ingest(corpus.back());
    }
    oracle::Bm25Oracle bm25(corpus);
    for (int k = 0; k < 10; ++k) {
      auto query = oracle::random_query(rng, 4);
      auto hits = catalog.execute_query(query, corpus.size() + 1);
      std::map<std::string, double> expected;
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (oracle::matches(corpus[d], query)) expected[corpus[d].id] = bm25.score(d, query);
      }
      ASSERT_EQ(hits.size(), expected.size()) << to_string(query);
      for (const auto& h : hits) {
        ASSERT_TRUE(expected.count(h.dataset_id));
        EXPECT_NEAR(h.score, expected[h.dataset_id], 1e-9);
        EXPECT_GE(h.score, 0.0);
      }
    }
  }
}

TEST(Query, AddingConjunctiveFilterNeverAddsHits) {
  std::mt19937 rng(99);
  Catalog catalog;
  for (int i = 0; i < 200; ++i) catalog.ingest(oracle::random_record(rng, i));
  for (int k = 0; k < 50; ++k) {
    auto base = oracle::random_query(rng, 3);
    auto extra = oracle::random_query(rng, 2, false);
    if (std::holds_alternative<node::Not>(base.node)) continue;
    auto narrowed = q::all({base, extra});
    auto wide = id_set(catalog.execute_query(base, 1000));
    for (const auto& id : id_set(catalog.execute_query(narrowed, 1000))) {
      EXPECT_TRUE(wide.count(id));
    }
  }
}

TEST(Corpus, LoaderRejectsUnknownFields) {
  auto path = std::filesystem::temp_directory_path() / "geoagent_corpus_unknown.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id":"a","title":"ok","layout":"tabular","size_bytes":1})" << "\n";
    out << R"({"id":"b","title":"bad","colour":"red"})" << "\n";
  }
  try {
    load_corpus(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
}

TEST(Corpus, JsonRoundTrip) {
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto m = oracle::random_record(rng, i);
    // Doubles survive the JSON text form exactly.
    EXPECT_EQ(metadata_from_json(nlohmann::json::parse(to_json(m).dump())), m);
  }
}
