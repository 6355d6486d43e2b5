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

#include "geoagent/bench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geoagent/error.hpp"
#include "geoagent/llm/schema.hpp"

namespace geoagent::bench {

namespace {

constexpr std::array<std::pair<Category, const char*>, 5> kCategoryNames = {{
    {Category::SpecificEntity, "SpecificEntity"},
    {Category::BroadThematic, "BroadThematic"},
    {Category::SpatiotemporalSlicing, "SpatiotemporalSlicing"},
    {Category::ParameterSpecific, "ParameterSpecific"},
    {Category::CrossDomain, "CrossDomain"},
}};

constexpr std::array<std::pair<Architecture, const char*>, 3> kArchNames = {{
    {Architecture::Baseline, "baseline"},
    {Architecture::Simple, "simple"},
    {Architecture::Agentic, "agentic"},
}};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool has_parameter(const catalog::DatasetMetadata& m, const std::string& wanted) {
  const auto need = catalog::tokenize(wanted);
  if (need.empty()) return false;
  return std::any_of(m.parameters.begin(), m.parameters.end(), [&](const catalog::Parameter& p) {
    const auto have = catalog::tokenize(p.name);
    return std::all_of(need.begin(), need.end(), [&](const std::string& t) {
      return std::find(have.begin(), have.end(), t) != have.end();
    });
  });
}

std::vector<std::string> top_ids(const search::RankedResults& results) {
  std::vector<std::string> ids;
  for (const auto& e : results.entries) {
    if (ids.size() == kJudgedResults) break;
    ids.push_back(e.dataset_id);
  }
  return ids;
}

Annotations annotations_from_json(const json& v) {
  Annotations a;
  if (v.contains("relevant_ids")) {
    for (const auto& id : v.at("relevant_ids")) a.relevant_ids.insert(id.get<std::string>());
  }
  if (v.contains("geo")) a.geo = catalog::geobox_from_json(v.at("geo"));
  if (v.contains("time")) a.time = catalog::timerange_from_json(v.at("time"));
  if (v.contains("required_parameters")) {
    a.required_parameters = v.at("required_parameters").get<std::vector<std::string>>();
  }
  return a;
}

json scores_json(const JudgeScores& s) {
  json out = json::object();
  for (std::size_t i = 0; i < kMetricCount; ++i) out[kMetricNames[i]] = s.m[i];
  return out;
}

JudgeScores scores_from_json(const json& v) {
  JudgeScores s;
  for (std::size_t i = 0; i < kMetricCount; ++i) s.m[i] = v.at(kMetricNames[i]).get<double>();
  return s;
}

search::RankedResults run_one(Architecture arch, const BenchQuery& q,
                              const catalog::Catalog& catalog, llm::Backend& llm,
                              const BenchConfig& config) {
  switch (arch) {
    case Architecture::Baseline:
      return search::baseline_search(q.text, catalog, config.search.top_k);
    case Architecture::Simple:
      return search::simple_llm_search(q.text, catalog, llm, config.search.top_k,
                                       config.search.model_tag);
    case Architecture::Agentic:
      return search::agentic_search(q.text, catalog, llm, config.search);
  }
  return {};
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [k, name] : kCategoryNames) {
    if (k == c) return name;
  }
  return "SpecificEntity";
}

Category category_from_json(const json& value) {
  if (value.is_number_integer()) {
    const int n = value.get<int>();
    if (n < 1 || n > 5) {
      throw Error(ErrorCode::InvalidArgument, "category must be 1..5, got " + std::to_string(n));
    }
    return static_cast<Category>(n);
  }
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    for (const auto& [k, name] : kCategoryNames) {
      if (text == name) return k;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown category '" + text + "'");
  }
  throw Error(ErrorCode::InvalidArgument, "category must be an integer or a name");
}

json to_json(const BenchQuery& q) {
  json out = {{"id", q.id}, {"text", q.text}, {"category", static_cast<int>(q.category)}};
  if (!q.truth.relevant_ids.empty()) out["relevant_ids"] = q.truth.relevant_ids;
  if (q.truth.geo) out["geo"] = catalog::to_json(*q.truth.geo);
  if (q.truth.time) out["time"] = catalog::to_json(*q.truth.time);
  if (!q.truth.required_parameters.empty()) {
    out["required_parameters"] = q.truth.required_parameters;
  }
  return out;
}

std::vector<BenchQuery> load_queries(const std::filesystem::path& path,
                                     std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<BenchQuery> out;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.filename().string() + ":" + std::to_string(line_no);
    const json v = json::parse(line, nullptr, false);
    if (v.is_discarded() || !v.is_object()) {
      throw Error(ErrorCode::ParseError, where + ": not a JSON object");
    }
    BenchQuery q;
    try {
      q.id = v.at("id").get<std::string>();
      q.text = v.at("text").get<std::string>();
      q.category = category_from_json(v.at("category"));
      q.truth = annotations_from_json(v);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    if (q.id.empty()) throw Error(ErrorCode::ParseError, where + ": empty id");
    if (!seen.insert(q.id).second) {
      throw Error(ErrorCode::ParseError, where + ": duplicate id '" + q.id + "'");
    }
    out.push_back(std::move(q));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no queries");

  std::map<Category, std::size_t> counts;
  for (const auto& [k, _] : kCategoryNames) counts[k] = 0;
  for (const auto& q : out) ++counts[q.category];
  const auto [lo, hi] = std::minmax_element(
      counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  if (warnings && lo->second != hi->second) {
    std::ostringstream msg;
    msg << "category counts are unbalanced:";
    for (const auto& [k, n] : counts) msg << " " << to_string(k) << "=" << n;
    warnings->push_back(msg.str());
  }
  return out;
}

double JudgeScores::mean() const {
  double sum = 0;
  for (double v : m) sum += v;
  return sum / static_cast<double>(kMetricCount);
}

JudgeScores oracle_judge(const BenchQuery& query, const search::RankedResults& results,
                         const catalog::Catalog& catalog) {
  const auto ids = top_ids(results);
  JudgeScores s;
  if (ids.empty()) return s;
  const auto& t = query.truth;
  double relevant = 0, spatiotemporal = 0, coverage = 0, usability = 0;
  for (const auto& id : ids) {
    relevant += t.relevant_ids.count(id) > 0;
    const auto meta = catalog.find(id);
    if (!meta) continue;
    const bool geo_ok = !t.geo || (meta->geo && t.geo->intersects(*meta->geo));
    const bool time_ok = !t.time || (meta->time && t.time->overlaps(*meta->time));
    spatiotemporal += geo_ok && time_ok;
    coverage += std::all_of(t.required_parameters.begin(), t.required_parameters.end(),
                            [&](const std::string& p) { return has_parameter(*meta, p); });
    usability += meta->parameters.empty() ? 5.0 : 10.0;
  }
  const double n = static_cast<double>(ids.size());
  s.m[0] = 10.0 * relevant / n;
  s.m[1] = 10.0 * spatiotemporal / n;
  s.m[2] = 10.0 * coverage / n;
  s.m[3] = usability / n;
  s.m[4] = 10.0 * (1.0 - (n - relevant) / static_cast<double>(kJudgedResults));
  return s;
}

const json& judge_schema() {
  static const json schema = [] {
    json props = json::object();
    json required = json::array();
    for (const char* name : kMetricNames) {
      props[name] = {{"type", "number"}, {"minimum", 0}, {"maximum", 10}};
      required.push_back(name);
    }
    return json{{"type", "object"},
                {"required", required},
                {"properties", props},
                {"additionalProperties", false}};
  }();
  return schema;
}

JudgeScores model_judge(const BenchQuery& query, const search::RankedResults& results,
                        const catalog::Catalog& catalog, llm::Backend& backend,
                        const std::string& model_tag) {
  const auto ids = top_ids(results);
  if (ids.empty()) return JudgeScores{};
  std::ostringstream user;
  user << "Query (" << to_string(query.category) << "):\n" << query.text << "\n\nTop results:\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto meta = catalog.find(ids[i]);
    user << (i + 1) << ". "
         << (meta ? catalog::to_json(*meta).dump() : json{{"id", ids[i]}, {"missing", true}}.dump())
         << "\n";
  }
  llm::ChatRequest req;
  req.model_tag = model_tag;
  req.response_schema = judge_schema();
  req.messages.push_back(llm::Message::text(
      llm::Role::System,
      std::string("You grade dataset search results for a geoscience archive.\n") +
          kBenchJudgeMarker +
          "\nScore each metric from 0 to 10 over the listed results:\n"
          "m1_precision: share of results that answer the query.\n"
          "m2_spatiotemporal: share matching the requested region and period.\n"
          "m3_parameter_coverage: share carrying the requested variables.\n"
          "m4_access_usability: whether records describe parameters and data layout.\n"
          "m5_noise_reduction: absence of irrelevant results.\n"
          "Reply with one JSON object."));
  req.messages.push_back(llm::Message::text(llm::Role::User, user.str()));
  const auto reply = llm::complete(req, backend);
  return scores_from_json(*reply.structured);
}

std::string_view to_string(Architecture a) {
  for (const auto& [k, name] : kArchNames) {
    if (k == a) return name;
  }
  return "baseline";
}

Architecture architecture_from_string(std::string_view text) {
  for (const auto& [k, name] : kArchNames) {
    if (text == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(text) + "'");
}

BenchReport aggregate(std::vector<RawRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
    if (a.query_id != b.query_id) return a.query_id < b.query_id;
    return a.architecture < b.architecture;
  });
  BenchReport report;
  std::map<Architecture, std::vector<const RawRow*>> by_arch;
  for (const auto& r : rows) by_arch[r.architecture].push_back(&r);
  for (const auto& [arch, list] : by_arch) {
    ArchitectureSummary s;
    s.queries = list.size();
    const double n = static_cast<double>(list.size());
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      double sum = 0;
      for (const auto* r : list) sum += r->scores.m[k];
      const double mean = sum / n;
      double sq = 0;
      for (const auto* r : list) sq += (r->scores.m[k] - mean) * (r->scores.m[k] - mean);
      s.metrics[k] = {mean, std::sqrt(sq / n)};
      s.overall += mean;
    }
    s.overall /= static_cast<double>(kMetricCount);
    for (const auto* r : list) s.failures += r->error.has_value();
    report.summary[arch] = s;
  }
  report.rows = std::move(rows);
  return report;
}

BenchReport run_benchmark(const std::vector<BenchQuery>& queries, const catalog::Catalog& catalog,
                          llm::Backend& llm, const JudgeFn& judge, const BenchConfig& config) {
  if (config.architectures.empty()) {
    throw Error(ErrorCode::InvalidArgument, "select at least one architecture");
  }
  if (!judge) throw Error(ErrorCode::InvalidArgument, "no judge");
  std::vector<RawRow> rows;
  for (const auto arch : config.architectures) {
    for (const auto& q : queries) {
      RawRow row;
      row.query_id = q.id;
      row.category = q.category;
      row.architecture = arch;
      try {
        const auto results = run_one(arch, q, catalog, llm, config);
        row.result_ids = top_ids(results);
        row.scores = judge(q, results);
      } catch (const Error& e) {
        row.scores = JudgeScores{};
        row.result_ids.clear();
        row.error = e.what();
        row.error_code = std::string(to_string(e.code()));
      }
      rows.push_back(std::move(row));
    }
  }
  return aggregate(std::move(rows));
}

json to_json(const BenchReport& report) {
  json summary = json::object();
  for (const auto& [arch, s] : report.summary) {
    json metrics = json::object();
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      metrics[kMetricNames[k]] = {{"mean", s.metrics[k].mean}, {"std_dev", s.metrics[k].std_dev}};
    }
    summary[std::string(to_string(arch))] = {{"metrics", metrics},
                                             {"overall", s.overall},
                                             {"queries", s.queries},
                                             {"failures", s.failures}};
  }
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"query_id", r.query_id},
                {"category", static_cast<int>(r.category)},
                {"architecture", to_string(r.architecture)},
                {"scores", scores_json(r.scores)},
                {"result_ids", r.result_ids}};
    if (r.error) row["error"] = *r.error;
    if (r.error_code) row["error_code"] = *r.error_code;
    rows.push_back(std::move(row));
  }
  return {{"summary", summary}, {"rows", rows}};
}

BenchReport report_from_json(const json& value) {
  try {
    BenchReport report;
    for (const auto& [name, s] : value.at("summary").items()) {
      ArchitectureSummary out;
      for (std::size_t k = 0; k < kMetricCount; ++k) {
        const auto& m = s.at("metrics").at(kMetricNames[k]);
        out.metrics[k] = {m.at("mean").get<double>(), m.at("std_dev").get<double>()};
      }
      out.overall = s.at("overall").get<double>();
      out.queries = s.at("queries").get<std::size_t>();
      out.failures = s.at("failures").get<std::size_t>();
      report.summary[architecture_from_string(name)] = out;
    }
    for (const auto& r : value.at("rows")) {
      RawRow row;
      row.query_id = r.at("query_id").get<std::string>();
      row.category = category_from_json(r.at("category"));
      row.architecture = architecture_from_string(r.at("architecture").get<std::string>());
      row.scores = scores_from_json(r.at("scores"));
      row.result_ids = r.at("result_ids").get<std::vector<std::string>>();
      if (r.contains("error")) row.error = r.at("error").get<std::string>();
      if (r.contains("error_code")) row.error_code = r.at("error_code").get<std::string>();
      report.rows.push_back(std::move(row));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
}

std::string render_table(const BenchReport& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %-24s %8s %8s\n", "architecture", "metric", "mean", "std");
  out << buf;
  for (const auto& [arch, s] : report.summary) {
    const std::string name(to_string(arch));
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      std::snprintf(buf, sizeof buf, "%-12s %-24s %8s %8s\n", name.c_str(), kMetricNames[k],
                    fixed2(s.metrics[k].mean).c_str(), fixed2(s.metrics[k].std_dev).c_str());
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-12s %-24s %8s %8s\n", name.c_str(), "overall",
                  fixed2(s.overall).c_str(), "");
    out << buf;
  }
  return out.str();
}

ReportFormat format_from_string(std::string_view text) {
  if (text == "table") return ReportFormat::Table;
  if (text == "machine") return ReportFormat::Machine;
  throw Error(ErrorCode::InvalidArgument, "format must be table or machine");
}

void emit_report(const BenchReport& report, const std::filesystem::path& out,
                 ReportFormat format) {
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, "cannot write " + out.string());
  if (format == ReportFormat::Table) {
    file << render_table(report);
  } else {
    file << to_json(report).dump(2) << "\n";
  }
  file.flush();
  if (!file) throw Error(ErrorCode::IoError, "write failed for " + out.string());
}

}  // namespace geoagent::bench
