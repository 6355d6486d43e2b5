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

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geoagent/catalog/catalog.hpp"
#include "geoagent/llm/gateway.hpp"
#include "geoagent/search/search.hpp"

namespace geoagent::bench {

using nlohmann::json;

enum class Category {
  SpecificEntity = 1,
  BroadThematic = 2,
  SpatiotemporalSlicing = 3,
  ParameterSpecific = 4,
  CrossDomain = 5,
};

std::string_view to_string(Category c);
/// Accepts 1..5 or the category name. Throws InvalidArgument.
Category category_from_json(const json& value);

/// Ground truth for the oracle judge. Every field is optional.
struct Annotations {
  std::set<std::string> relevant_ids;
  std::optional<search::GeoBox> geo;
  std::optional<search::TimeRange> time;
  std::vector<std::string> required_parameters;

  friend bool operator==(const Annotations&, const Annotations&) = default;
};

struct BenchQuery {
  std::string id;
  std::string text;
  Category category = Category::SpecificEntity;
  Annotations truth;

  friend bool operator==(const BenchQuery&, const BenchQuery&) = default;
};

json to_json(const BenchQuery& q);

/// One JSON object per line, blank lines skipped. Duplicate ids, bad
/// categories, malformed lines and an empty file are a ParseError naming the
/// line. Category imbalance is appended to `warnings`.
std::vector<BenchQuery> load_queries(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings = nullptr);

inline constexpr std::size_t kMetricCount = 5;
inline constexpr std::array<const char*, kMetricCount> kMetricNames = {
    "m1_precision", "m2_spatiotemporal", "m3_parameter_coverage", "m4_access_usability",
    "m5_noise_reduction"};
inline constexpr std::size_t kJudgedResults = 5;
inline constexpr const char* kBenchJudgeMarker = "Stage: bench-judge";

struct JudgeScores {
  std::array<double, kMetricCount> m{};  // m1..m5, each in [0, 10]

  double mean() const;
  friend bool operator==(const JudgeScores&, const JudgeScores&) = default;
};

/// Pure function of the annotations and the top-5 ids:
///   m1 = 10 * relevant / returned
///   m2 = 10 * share meeting the annotated box and range
///   m3 = 10 * share carrying every required parameter
///   m4 = mean of 10 (parameters listed) or 5 (none)
///   m5 = 10 * (1 - false positives / 5)
/// Empty results score zero everywhere. Unknown ids count as failing every
/// check.
JudgeScores oracle_judge(const BenchQuery& query, const search::RankedResults& results,
                         const catalog::Catalog& catalog);

/// Prompts with the query, the top-5 metadata and the rubric. Throws
/// SchemaViolation on a malformed verdict.
JudgeScores model_judge(const BenchQuery& query, const search::RankedResults& results,
                        const catalog::Catalog& catalog, llm::Backend& backend,
                        const std::string& model_tag = "judge");

const json& judge_schema();

using JudgeFn = std::function<JudgeScores(const BenchQuery&, const search::RankedResults&)>;

enum class Architecture { Baseline, Simple, Agentic };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view text);

struct RawRow {
  std::string query_id;
  Category category = Category::SpecificEntity;
  Architecture architecture = Architecture::Baseline;
  JudgeScores scores;
  std::vector<std::string> result_ids;
  std::optional<std::string> error;
  std::optional<std::string> error_code;

  friend bool operator==(const RawRow&, const RawRow&) = default;
};

struct MetricStat {
  double mean = 0;
  double std_dev = 0;  // population

  friend bool operator==(const MetricStat&, const MetricStat&) = default;
};

struct ArchitectureSummary {
  std::array<MetricStat, kMetricCount> metrics{};
  double overall = 0;  // mean of the five metric means
  std::size_t queries = 0;
  std::size_t failures = 0;

  friend bool operator==(const ArchitectureSummary&, const ArchitectureSummary&) = default;
};

struct BenchReport {
  std::map<Architecture, ArchitectureSummary> summary;
  std::vector<RawRow> rows;  // ordered by (query id, architecture)

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

/// Orders the rows and recomputes every summary from them.
BenchReport aggregate(std::vector<RawRow> rows);

struct BenchConfig {
  std::set<Architecture> architectures{Architecture::Baseline, Architecture::Simple,
                                       Architecture::Agentic};
  search::SearchConfig search;
};

/// Every query through every architecture, top 5 judged. A failing query
/// scores zero and carries the error text. Throws InvalidArgument when no
/// architecture is selected.
BenchReport run_benchmark(const std::vector<BenchQuery>& queries, const catalog::Catalog& catalog,
                          llm::Backend& llm, const JudgeFn& judge, const BenchConfig& config = {});

json to_json(const BenchReport& report);
/// Throws ParseError.
BenchReport report_from_json(const json& value);

/// One row per (architecture, metric) plus an overall row per
/// architecture; numbers to 2 decimals.
std::string render_table(const BenchReport& report);

enum class ReportFormat { Table, Machine };

ReportFormat format_from_string(std::string_view text);

/// Throws IoError when the file cannot be written.
void emit_report(const BenchReport& report, const std::filesystem::path& out,
                 ReportFormat format);

}  // namespace geoagent::bench
