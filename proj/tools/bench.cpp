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

// bench: runs the dataset search benchmark and writes a report.
//
//   bench run --arch baseline,simple,agentic --queries FILE --catalog FILE
//             --judge oracle|model --out FILE --format table|machine
//             [--llm CONFIG.json | --script RULES.json] [--judge-llm CONFIG.json]
//
// Exit status: 0 done, 2 parse error, 3 backend failure, 1 anything else.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "geoagent/bench/bench.hpp"
#include "geoagent/error.hpp"
#include "geoagent/llm/backends.hpp"

namespace {

using namespace geoagent;

constexpr int kExitParse = 2;
constexpr int kExitBackend = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

llm::BackendHandle backend_from(const std::string& config_path, const std::string& script) {
  if (!script.empty()) {
    return llm::make_backend({{"kind", "scripted"}, {"script", script}},
                             std::filesystem::current_path());
  }
  if (config_path.empty()) return nullptr;
  std::ifstream in(config_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + config_path);
  const auto config = nlohmann::json::parse(in, nullptr, false);
  if (config.is_discarded()) throw Error(ErrorCode::ParseError, config_path + " is not JSON");
  return llm::make_backend(config, std::filesystem::path(config_path).parent_path());
}

bool backend_code(const std::string& code) {
  return code == "ProviderUnreachable" || code == "NoMatchingScript";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset search benchmark"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run the benchmark");

  std::string arch_list = "baseline,simple,agentic";
  std::string queries_path, catalog_path, out_path;
  std::string judge_kind = "oracle", format = "table";
  std::string llm_config, script, judge_config;
  run->add_option("--arch", arch_list, "Comma-separated architectures");
  run->add_option("--queries", queries_path, "Query file (JSON lines)")->required();
  run->add_option("--catalog", catalog_path, "Catalog corpus (JSON lines)")->required();
  run->add_option("--judge", judge_kind, "oracle or model")
      ->check(CLI::IsMember({"oracle", "model"}));
  run->add_option("--out", out_path, "Report file")->required();
  run->add_option("--format", format, "table or machine")
      ->check(CLI::IsMember({"table", "machine"}));
  run->add_option("--llm", llm_config, "Backend config for the search tiers");
  run->add_option("--script", script, "Scripted rules for the search tiers");
  run->add_option("--judge-llm", judge_config, "Backend config for the model judge");

  CLI11_PARSE(app, argc, argv);

  try {
    bench::BenchConfig config;
    config.architectures.clear();
    for (const auto& name : split(arch_list, ',')) {
      config.architectures.insert(bench::architecture_from_string(name));
    }

    std::vector<std::string> warnings;
    const auto queries = bench::load_queries(queries_path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    catalog::Catalog catalog;
    for (auto& meta : catalog::load_corpus(catalog_path)) catalog.ingest(std::move(meta));

    auto llm = backend_from(llm_config, script);
    if (!llm) {
      // The baseline needs no model; an empty script fails any model call.
      llm = std::make_shared<llm::ScriptedBackend>();
    }

    bench::JudgeFn judge;
    llm::BackendHandle judge_backend;
    if (judge_kind == "oracle") {
      judge = [&](const bench::BenchQuery& q, const search::RankedResults& r) {
        return bench::oracle_judge(q, r, catalog);
      };
    } else {
      judge_backend = backend_from(judge_config, {});
      if (!judge_backend) judge_backend = llm;
      judge = [&](const bench::BenchQuery& q, const search::RankedResults& r) {
        return bench::model_judge(q, r, catalog, *judge_backend);
      };
    }

    const auto report = bench::run_benchmark(queries, catalog, *llm, judge, config);
    bench::emit_report(report, out_path, bench::format_from_string(format));
    std::cout << bench::render_table(report);

    int backend_failures = 0;
    for (const auto& row : report.rows) {
      if (row.error) {
        std::cerr << row.query_id << " [" << bench::to_string(row.architecture)
                  << "]: " << *row.error << "\n";
      }
      backend_failures += row.error_code && backend_code(*row.error_code);
    }
    return backend_failures > 0 ? kExitBackend : 0;
  } catch (const Error& e) {
    std::cerr << "bench: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError: return kExitParse;
      case ErrorCode::ProviderUnreachable:
      case ErrorCode::NoMatchingScript: return kExitBackend;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 1;
  }
}
