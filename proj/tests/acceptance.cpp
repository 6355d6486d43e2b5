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

// Acceptance suite. One line per criterion: "A<n> PASS|FAIL <detail> (<ms> ms)".
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "geoagent/bench/bench.hpp"
#include "geoagent/catalog/catalog.hpp"
#include "geoagent/error.hpp"
#include "geoagent/geo/numerics.hpp"
#include "geoagent/llm/backends.hpp"
#include "geoagent/memory/memory.hpp"
#include "geoagent/orchestrator/orchestrator.hpp"
#include "geoagent/qc/qc.hpp"
#include "geoagent/sandbox/kernel.hpp"
#include "geoagent/sandbox/repair.hpp"
#include "geoagent/service/service.hpp"
#include "support/numerics_oracle.hpp"
#include "support/query_oracle.hpp"
#include "support/scenario.hpp"
#include "support/temp_dir.hpp"

using namespace geoagent;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kBench = fs::path(GEOAGENT_FIXTURES) / "bench";

// Collects the first few failed expectations of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << " want " << want;
    expect(std::abs(got - want) <= tol || (std::isnan(got) && std::isnan(want)), s.str());
  }
  bool ok() const { return failures_ == 0; }
  long checks() const { return checks_; }
  std::string failures() const {
    std::string out = std::to_string(failures_) + " failed";
    for (const auto& n : notes_) out += "; " + n;
    return out;
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::vector<std::string> notes_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome verdict(const Check& c, const std::string& detail, double secs, double limit_s) {
  if (!c.ok()) return {false, c.failures()};
  if (secs >= limit_s) {
    std::ostringstream s;
    s << "took " << secs << " s, limit " << limit_s << " s";
    return {false, s.str()};
  }
  return {true, detail + ", " + std::to_string(c.checks()) + " checks"};
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------- A1

Outcome a1_benchmark_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  catalog::Catalog cat;
  for (auto& m : catalog::load_corpus(kBench / "catalog.jsonl")) cat.ingest(std::move(m));
  const auto queries = bench::load_queries(kBench / "queries.jsonl");
  llm::ScriptedBackend llm;
  llm.load_rules_file(kBench / "script.json");
  const auto report = bench::run_benchmark(
      queries, cat, llm,
      [&](const bench::BenchQuery& q, const search::RankedResults& r) {
        return bench::oracle_judge(q, r, cat);
      });
  const double secs = since(t0);

  Check c;
  c.expect(queries.size() == 20, "corpus has " + std::to_string(queries.size()) + " queries");
  const double base = report.summary.at(bench::Architecture::Baseline).overall;
  const double simple = report.summary.at(bench::Architecture::Simple).overall;
  const double agentic = report.summary.at(bench::Architecture::Agentic).overall;
  std::ostringstream s;
  s.precision(3);
  s << "agentic " << agentic << " > simple " << simple << " > baseline " << base;
  c.expect(agentic - simple >= 1.0, "agentic-simple gap < 1: " + s.str());
  c.expect(simple - base >= 1.0, "simple-baseline gap < 1: " + s.str());
  for (const auto& [arch, sum] : report.summary) {
    c.expect(sum.failures == 0, std::string(bench::to_string(arch)) + " had failures");
  }
  return verdict(c, s.str(), secs, 30.0);
}

// ------------------------------------------------------------------- A2

Outcome a2_index_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::mt19937 rng(2026);
  long hits_total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    catalog::Catalog cat;
    std::vector<catalog::DatasetMetadata> corpus;
    const int n = 1 + static_cast<int>(rng() % 1000);
    for (int i = 0; i < n; ++i) {
      corpus.push_back(oracle::random_record(rng, i));
      cat.ingest(corpus.back());
    }
    const auto query = oracle::random_query(rng, 4);
    std::set<std::string> got, want;
    for (const auto& h : cat.execute_query(query, corpus.size() + 1)) got.insert(h.dataset_id);
    for (const auto& m : corpus) {
      if (oracle::matches(m, query)) want.insert(m.id);
    }
    hits_total += static_cast<long>(want.size());
    c.expect(got == want, "trial " + std::to_string(trial) + " id sets differ for " +
                              catalog::to_string(query));
  }
  return verdict(c, "200 cases, 0 mismatches, " + std::to_string(hits_total) + " hits", since(t0),
                 10.0);
}

// ------------------------------------------------------------------- A3

using orchestrator::AgentRole;
using orchestrator::RefProfile;
using orchestrator::Task;
using orchestrator::TaskKind;

// The routing table, written out independently.
AgentRole table_route(TaskKind kind, bool external, const RefProfile& ref) {
  if (kind == TaskKind::Visualization) return AgentRole::Visualization;
  if (kind == TaskKind::Synthesis) return AgentRole::Writer;
  if (kind == TaskKind::Retrieval) return external ? AgentRole::Oceanographer : AgentRole::Search;
  if (ref.flags.is_gridded) return AgentRole::Oceanographer;
  if (ref.taxonomic) return AgentRole::Ecologist;
  return AgentRole::DataFrame;
}

Task make_task(TaskKind kind, std::vector<std::string> refs) {
  Task t;
  t.id = "t";
  t.description = "task";
  t.kind = kind;
  t.dataset_refs = std::move(refs);
  return t;
}

Outcome a3_routing_table() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  const TaskKind kinds[] = {TaskKind::Analysis, TaskKind::Visualization, TaskKind::Retrieval,
                            TaskKind::Synthesis};
  int cells = 0;
  for (unsigned bits = 0; bits < 32; ++bits) {
    for (auto kind : kinds) {
      for (int taxa = 0; taxa < 2; ++taxa) {
        for (int external = 0; external < 2; ++external) {
          const RefProfile prof{catalog::FeatureFlags::from_bits(bits), taxa == 1};
          const std::map<std::string, RefProfile> p = {{"d", prof}};
          auto t = make_task(kind, {"d"});
          t.external_retrieval = external == 1;
          const std::string cell = "flags=" + std::to_string(bits) + " kind=" +
                                   std::string(orchestrator::to_string(kind));
          AgentRole role;
          try {
            role = orchestrator::route(t, p);
          } catch (const Error& e) {
            c.expect(false, cell + " threw " + e.what());
            continue;
          }
          c.expect(role == table_route(kind, external == 1, prof), cell + " differs from table");
          c.expect(!orchestrator::enforce_role_constraints(t, role, p), cell + " routed to a banned role");
          if (kind == TaskKind::Visualization) {
            c.expect(orchestrator::enforce_role_constraints(t, AgentRole::DataFrame, p).has_value(),
                     cell + " DataFrame visualization accepted");
          }
          ++cells;
        }
      }
    }
  }
  c.expect(cells == 32 * 4 * 4, "table not total");

  // Gridded with a depth axis goes to the Oceanographer; a flat table
  // without geo goes to DataFrame.
  auto grid = testutil::currents_record();
  catalog::DatasetMetadata flat;
  flat.id = "lab-nutrients";
  flat.title = "Nutrient concentrations from incubation experiments";
  flat.parameters = {{"nitrate", "umol/l"}, {"phosphate", "umol/l"}};
  const std::map<std::string, RefProfile> anchored = {{"grid", orchestrator::profile_for(grid)},
                                                      {"flat", orchestrator::profile_for(flat)}};
  c.expect(anchored.at("grid").flags.is_gridded && anchored.at("grid").flags.has_depth_axis,
           "gridded record lacks flags");
  c.expect(orchestrator::route(make_task(TaskKind::Analysis, {"grid"}), anchored) ==
               AgentRole::Oceanographer,
           "gridded+depth not Oceanographer");
  c.expect(orchestrator::route(make_task(TaskKind::Analysis, {"flat"}), anchored) ==
               AgentRole::DataFrame,
           "flat non-geo not DataFrame");
  c.expect(orchestrator::enforce_role_constraints(make_task(TaskKind::Visualization, {"flat"}),
                                                  AgentRole::DataFrame, anchored)
               .has_value(),
           "DataFrame visualization of a flat table accepted");
  return verdict(c, std::to_string(cells) + " cells match", since(t0), 60.0);
}

// ------------------------------------------------------------------- A4

json ok_reply() {
  return {{"status", "ok"}, {"stdout", ""}, {"stderr", ""}, {"bindings", json::array()},
          {"duration_ms", 1}};
}

json error_reply(const std::string& type, int line) {
  return {{"status", "error"},
          {"stdout", ""},
          {"stderr", ""},
          {"traceback",
           {{"exception_type", type},
            {"message", "failure at line " + std::to_string(line)},
            {"frames", json::array({{{"file", "<cell>"},
                                     {"line", line},
                                     {"code_line", "value = data[" + std::to_string(line) + "]"}}})}}},
          {"bindings", json::array()},
          {"duration_ms", 1}};
}

Outcome a4_repair_counting() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  int cases = 0;
  for (int len = 0; len <= 6; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      for (int budget = 1; budget <= 3; ++budget) {
        std::vector<json> replies;
        for (int i = 0; i < len; ++i) {
          replies.push_back((mask >> i) & 1 ? ok_reply() : error_reply("E" + std::to_string(i), i + 1));
        }
        replies.push_back(error_reply("Tail", 99));
        testutil::TempDir tmp;
        auto session = sandbox::create_session(
            tmp.path(), [replies] { return sandbox::ScriptedTransport::table(replies); });
        llm::ScriptedBackend primary, secondary;
        primary.add_rule({sandbox::kGenerateMarker}, "```python\nstep()\n```");
        primary.add_rule({sandbox::kRepairMarker}, "```python\nstep_fixed()\n```");
        secondary.add_rule({sandbox::kEscalateMarker}, "```python\nwise_step()\n```");
        sandbox::RepairConfig cfg;
        cfg.budget = budget;
        const auto out = sandbox::repair_loop("t", *session.kernel, primary, secondary, cfg);

        const std::string tag = "len=" + std::to_string(len) + " mask=" + std::to_string(mask) +
                                " budget=" + std::to_string(budget);
        std::size_t escalations = 0;
        for (const auto& r : secondary.requests()) {
          escalations += r.full_text().find(sandbox::kEscalateMarker) != std::string::npos;
        }
        bool exhausted = true;
        for (int i = 0; i < budget && i < len; ++i) exhausted &= !((mask >> i) & 1);

        c.expect(out.executions <= budget + 1, tag + " too many executions");
        c.expect(out.executions == session.kernel->executions(), tag + " execution count drift");
        c.expect(escalations == (exhausted ? 1u : 0u), tag + " escalation count");
        if (exhausted && escalations == 1) {
          const auto prompt = secondary.requests().front().full_text();
          for (int i = 0; i < budget; ++i) {
            const auto& tb = out.context.attempts.at(static_cast<std::size_t>(i)).result.traceback;
            c.expect(tb && prompt.find(sandbox::render_traceback(*tb)) != std::string::npos,
                     tag + " traceback " + std::to_string(i) + " missing from escalation");
          }
        }
        ++cases;
      }
    }
  }
  return verdict(c, std::to_string(cases) + " patterns", since(t0), 60.0);
}

// ------------------------------------------------------------------- A5

Outcome a5_qc_sequences() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  struct Case {
    std::vector<int> scores;
    std::size_t iterations;
    bool accepted;
  };
  const std::vector<Case> cases = {{{3, 9}, 2, true},
                                   {{3, 4, 4, 5, 9}, 5, true},
                                   {{7, 9}, 2, true},
                                   {{8}, 1, true},
                                   {{3, 3, 3, 3, 3, 3, 3}, 5, false},
                                   {{0, 1, 2, 7, 6, 5}, 5, false}};
  const auto loader = [](const std::string&) {
    return qc::Image{{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'}, "image/png"};
  };
  for (const auto& cs : cases) {
    llm::ScriptedBackend vlm;
    for (int s : cs.scores) {
      vlm.add_structured_rule({qc::kCritiqueMarker}, testutil::critique_reply(s, s >= 8), true);
    }
    const auto rec = qc::qc_loop(
        [](const std::vector<std::string>&, int i) { return "fig_" + std::to_string(i) + ".png"; },
        vlm, {}, loader);
    std::string seq;
    for (int s : cs.scores) seq += std::to_string(s) + " ";
    c.expect(rec.iterations.size() == cs.iterations, "[" + seq + "] iterations " +
                                                         std::to_string(rec.iterations.size()));
    c.expect(rec.accepted == cs.accepted, "[" + seq + "] acceptance");
    for (std::size_t i = 0; i < rec.iterations.size(); ++i) {
      c.expect(rec.iterations[i].critique.composite == cs.scores[i], "[" + seq + "] score order");
    }
  }
  return verdict(c, "3,9→2 3,4,4,5,9→5 7,9→2 8→1 accepted; all-low stop at 5", since(t0), 60.0);
}

// ------------------------------------------------------------------- A6

Outcome a6_interpolation() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::mt19937 rng(606);
  geo::Grid4D g = oracle::affine_grid(rng);
  auto within = [&](const std::vector<double>& axis) {
    std::uniform_real_distribution<double> u(std::min(axis.front(), axis.back()),
                                             std::max(axis.front(), axis.back()));
    return u(rng);
  };
  std::vector<geo::ObsPoint> track;
  std::vector<double> expected;
  for (int k = 0; k < 100; ++k) {
    const long secs = static_cast<long>(rng() % ((g.nt() - 1) * 86400));
    geo::ObsPoint p{oracle::day(0) + std::chrono::seconds(secs), within(g.lats()), within(g.lons()),
                    within(g.depths()), 0};
    track.push_back(p);
    expected.push_back(oracle::affine(secs / 86400.0, p.depth_m, p.lat, p.lon));
  }
  const auto got = geo::interp_4d(track, g);
  for (std::size_t i = 0; i < got.size(); ++i) c.near(got[i], expected[i], 1e-9, "affine point");

  std::vector<geo::ObsPoint> nodes;
  for (std::size_t i = 0; i < 40; ++i) {
    nodes.push_back({oracle::day(static_cast<int>(i % g.nt())), g.lats()[i % g.ny()],
                     g.lons()[i % g.nx()], g.depths()[i % g.nz()], 0});
  }
  const auto at_nodes = geo::interp_4d(nodes, g);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    c.expect(at_nodes[i] == g.at(i % g.nt(), i % g.nz(), i % g.ny(), i % g.nx()), "node value");
  }

  const auto edge = oracle::edge_track();
  c.expect(edge.size() == 2013, "track has " + std::to_string(edge.size()) + " points");
  const auto r = geo::edge_recovery(edge, oracle::snapped_provider, 0.3);
  c.expect(r.first_missing_count == 83, "first pass missing " + std::to_string(r.first_missing_count));
  c.expect(r.final_missing_count == 0, "after expansion missing " + std::to_string(r.final_missing_count));
  c.expect(r.fetches == 2, "fetches " + std::to_string(r.fetches));
  return verdict(c,
                 "100 affine points, 40 nodes, 2013-point track " +
                     std::to_string(r.first_missing_count) + "→" +
                     std::to_string(r.final_missing_count) + " missing",
                 since(t0), 5.0);
}

// ------------------------------------------------------------------- A7

geo::MatchupTable table_of(const std::vector<double>& model, const std::vector<double>& obs,
                           const std::vector<double>& depths) {
  geo::MatchupTable t;
  for (std::size_t i = 0; i < model.size(); ++i) {
    t.rows.push_back({geo::ObsPoint{oracle::day(0), 0, 0, depths[i], obs[i]}, model[i], true});
  }
  return t;
}

Outcome a7_numerics() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  constexpr int kInstances = 200;
  std::mt19937 rng(707);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  std::normal_distribution<double> nd(0, 1);

  // Nearest neighbour on the sphere and on the grid.
  for (int k = 0; k < kInstances; ++k) {
    geo::GeoPoint p(lat(rng), lon(rng));
    std::vector<geo::GeoPoint> cands;
    for (int i = 0; i < 25; ++i) cands.emplace_back(lat(rng), lon(rng));
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (oracle::haversine(p.lat(), p.lon(), cands[i].lat(), cands[i].lon()) <
          oracle::haversine(p.lat(), p.lon(), cands[best].lat(), cands[best].lon())) {
        best = i;
      }
    }
    c.expect(geo::haversine_nearest(p, cands) == best, "haversine nearest");
  }
  geo::Grid4D g = oracle::affine_grid(rng);
  std::uniform_real_distribution<double> any(-40, 40), z(-2, 12);
  for (int k = 0; k < kInstances; ++k) {
    geo::ObsPoint o{oracle::day(static_cast<int>(rng() % g.nt())), any(rng), any(rng), z(rng), 0};
    const auto idx = geo::nearest_grid_point(o, g);
    c.expect(idx.iz == oracle::argmin_abs(g.depths(), o.depth_m) &&
                 idx.iy == oracle::argmin_abs(g.lats(), o.lat) &&
                 idx.ix == oracle::argmin_abs(g.lons(), o.lon),
             "nearest grid point");
  }

  // Validation statistics and depth bins.
  const std::vector<double> edges{0, 50, 100, 200};
  std::uniform_real_distribution<double> zz(0, 220);
  for (int k = 0; k < kInstances; ++k) {
    const int n = 3 + static_cast<int>(rng() % 60);
    std::vector<double> m, o, d;
    for (int i = 0; i < n; ++i) {
      o.push_back(10 + 3 * nd(rng));
      m.push_back(0.8 * o.back() + nd(rng));
      d.push_back(i % 7 == 0 ? edges[static_cast<std::size_t>(i) % 4] : zz(rng));
    }
    const auto t = table_of(m, o, d);
    const auto s = geo::validation_stats(t);
    const auto ref = oracle::stats(m, o);
    c.near(s.bias, ref.bias, 1e-9, "bias");
    c.near(s.rmse, ref.rmse, 1e-9, "rmse");
    c.expect(s.pearson_r.has_value() == ref.r.has_value(), "pearson presence");
    if (s.pearson_r && ref.r) c.near(*s.pearson_r, *ref.r, 1e-9, "pearson");

    const auto bins = geo::depth_bin_stats(t, edges);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      const bool last = b + 2 == edges.size();
      std::vector<double> bm, bo;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (d[i] >= edges[b] && (d[i] < edges[b + 1] || (last && d[i] == edges[b + 1]))) {
          bm.push_back(m[i]);
          bo.push_back(o[i]);
        }
      }
      c.expect(bins.at(b).n == bm.size(), "depth bin count");
      if (!bm.empty() && bins.at(b).stats) {
        const auto br = oracle::stats(bm, bo);
        c.near(bins[b].stats->bias, br.bias, 1e-9, "bin bias");
        c.near(bins[b].stats->rmse, br.rmse, 1e-9, "bin rmse");
      }
      c.expect(bm.empty() != bins.at(b).stats.has_value(), "empty bin stats");
    }
  }

  // Shannon: random counts with zeros, uniform ln k, single taxon.
  for (int k = 0; k < kInstances; ++k) {
    std::vector<double> counts(1 + rng() % 20);
    for (auto& v : counts) v = rng() % 3 == 0 ? 0.0 : static_cast<double>(rng() % 500);
    counts[rng() % counts.size()] += 1;
    c.near(geo::shannon_index(counts), oracle::shannon(counts), 1e-9, "shannon");
    const int kk = 1 + static_cast<int>(rng() % 40);
    c.near(geo::shannon_index(std::vector<double>(static_cast<std::size_t>(kk), 1.0 + rng() % 9)),
           std::log(kk), 1e-9, "uniform ln k");
  }
  c.expect(geo::shannon_index(std::vector<double>{0, 5, 0}) == 0.0, "single taxon");

  // Wind rose.
  const auto& bedges = geo::beaufort_edges();
  auto labels13 = geo::beaufort_labels();
  labels13.push_back("extra");
  try {
    geo::wind_rose(std::vector<double>{0}, std::vector<double>{1}, bedges, labels13);
    c.expect(false, "13 edges + 13 labels accepted");
  } catch (const Error& e) {
    c.expect(e.code() == ErrorCode::LabelEdgeMismatch, "13 edges + 13 labels wrong code");
  }
  std::uniform_real_distribution<double> dir(-30, 400), spd(-1, 35);
  for (int k = 0; k < kInstances; ++k) {
    std::vector<double> dirs, speeds;
    const int n = 1 + static_cast<int>(rng() % 80);
    for (int i = 0; i < n; ++i) {
      dirs.push_back(rng() % 40 == 0 ? std::nan("") : dir(rng));
      speeds.push_back(rng() % 10 == 0 ? bedges[rng() % bedges.size()] : spd(rng));
    }
    const auto rose = geo::wind_rose(dirs, speeds, bedges, geo::beaufort_labels());
    std::vector<std::vector<long>> want(16, std::vector<long>(bedges.size() - 1, 0));
    long excluded = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const long cat = oracle::category(speeds[i], bedges);
      if (!std::isfinite(dirs[i]) || cat < 0) {
        ++excluded;
        continue;
      }
      ++want[oracle::sector(dirs[i])][static_cast<std::size_t>(cat)];
    }
    c.expect(rose.counts == want && rose.excluded == excluded, "wind rose counts");
  }

  // Inferential suite.
  std::uniform_int_distribution<int> coarse(0, 6);
  int inferential = 0;
  for (int k = 0; inferential < kInstances && k < 10 * kInstances; ++k) {
    std::vector<double> x, y;
    std::vector<bool> grp;
    const int n = 8 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      x.push_back(k % 2 ? coarse(rng) : nd(rng));
      y.push_back(k % 3 ? coarse(rng) + 0.5 * x.back() : nd(rng));
      grp.push_back(i % 2 == 0);
    }
    geo::InferentialStats s;
    try {
      s = geo::inferential_suite(x, y, grp);
    } catch (const Error& e) {
      c.expect(e.code() == ErrorCode::DegenerateInput, std::string("inferential threw ") + e.what());
      continue;
    }
    c.near(s.spearman_rho, oracle::pearson(oracle::ranks(x), oracle::ranks(y)), 1e-9, "spearman");
    std::vector<double> a, b;
    for (std::size_t i = 0; i < y.size(); ++i) (grp[i] ? a : b).push_back(y[i]);
    c.near(s.mann_whitney_u, oracle::mann_whitney_u(a, b), 1e-9, "mann-whitney U");
    const auto w = oracle::welch(a, b);
    c.near(s.welch_t, w.t, 1e-9, "welch t");
    c.near(s.welch_df, w.df, 1e-9, "welch df");
    const auto [slope, intercept] = oracle::ols(x, y);
    c.near(s.ols_slope, slope, 1e-9, "ols slope");
    c.near(s.ols_intercept, intercept, 1e-9, "ols intercept");
    ++inferential;
  }
  c.expect(inferential == kInstances, "only " + std::to_string(inferential) + " inferential instances");
  return verdict(c, "7 families x 200 instances", since(t0), 60.0);
}

// ------------------------------------------------------------------- A8

Outcome a8_isolation_and_replay() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  constexpr int kSessions = 8;
  {
    testutil::TempDir tmp;
    auto cfg = testutil::scenario_config(tmp.path());
    // Each session writes a figure named after itself so strays are traceable.
    cfg.backends = [](const std::string& id) {
      auto set = testutil::scenario_backends();
      auto primary = std::make_shared<llm::ScriptedBackend>();
      primary->add_rule({sandbox::kGenerateMarker, "Visualization agent"},
                        "```python\nplt.savefig('" + id + "_map.png')\n```");
      primary->load_rules(testutil::primary_rules());
      set.primary = primary;
      return set;
    };
    service::SessionManager m(std::move(cfg));
    std::vector<std::string> ids;
    for (int i = 0; i < kSessions; ++i) ids.push_back(m.create_session(true));
    std::vector<std::thread> posters;
    for (const auto& id : ids) {
      posters.emplace_back([&m, id] { m.post_message(id, "Map the mean surface current speed"); });
    }
    for (auto& t : posters) t.join();
    for (const auto& id : ids) m.wait_idle(id);

    for (const auto& id : ids) {
      const auto ws = m.workspace(id);
      const auto events = m.events(id).since(0);
      c.expect(!events.empty() && events.back().kind == "turn_done" &&
                   events.back().payload.value("outcome", "") == "complete",
               id + " did not complete");
      for (std::size_t i = 0; i < events.size(); ++i) {
        c.expect(events[i].seq == static_cast<long>(i) + 1, id + " sequence gap");
      }
      for (const auto& e : events) {
        const auto text = e.payload.dump();
        for (const auto& other : ids) {
          if (other != id) c.expect(text.find(other) == std::string::npos, id + " event names " + other);
        }
      }
      for (const auto& entry : fs::directory_iterator(ws)) {
        const auto name = entry.path().filename().string();
        c.expect(name.rfind(id, 0) == 0, id + " workspace holds " + name);
      }
      c.expect(fs::exists(ws / (id + "_map.png")), id + " figure missing");
    }
  }

  // Record a session, then replay it from its cassettes.
  testutil::TempDir tmp;
  const auto root = tmp.path() / "root";
  auto backend = [](const std::string& kind, const std::string& role, const json& rules) {
    const std::string tape = "tapes/{session}-" + role + ".jsonl";
    if (kind == "replay") return json{{"kind", "replay"}, {"cassette", tape}};
    return json{{"kind", "record"}, {"cassette", tape}, {"inner", {{"kind", "scripted"}, {"rules", rules}}}};
  };
  auto run = [&](const std::string& kind) {
    const json v = {{"root", root.string()},
                    {"backends",
                     {{"planner", backend(kind, "planner", testutil::planner_rules())},
                      {"primary", backend(kind, "primary", testutil::primary_rules())},
                      {"vision", backend(kind, "vision", testutil::vision_rules())}}}};
    auto cfg = service::ServiceConfig::from_json(v, tmp.path());
    cfg.catalog = testutil::scenario_catalog();
    cfg.clock = testutil::ticking_clock();
    cfg.new_session_id = testutil::counting_ids();
    {
      service::SessionManager m(std::move(cfg));
      const auto id = m.create_session(true);
      m.post_message(id, "Map the mean surface current speed");
      m.wait_idle(id);
    }
    std::ifstream in(root / ".events" / "s-0001.jsonl", std::ios::binary);
    std::string log{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    fs::remove_all(root);
    return log;
  };
  const auto recorded = run("record");
  const auto replayed = run("replay");
  c.expect(!recorded.empty(), "recorded log empty");
  c.expect(recorded == replayed, "replayed event log differs from the recording");
  return verdict(c,
                 std::to_string(kSessions) + " sessions isolated and gapless; replay of " +
                     std::to_string(recorded.size()) + "-byte log identical",
                 since(t0), 60.0);
}

// ------------------------------------------------------------------- A9

Outcome a9_memory_preservation() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  const fs::path root = "/work/s1";
  auto backend = std::make_shared<llm::ScriptedBackend>();
  backend->add_rule({memory::kSummarizeMarker}, "Loaded currents and computed speed.");
  memory::ConversationMemory mem(backend, "fast");
  std::mt19937 rng(909);
  int compressions = 0;
  for (int i = 0; i < 30; ++i) {
    std::string body = "message " + std::to_string(i);
    for (int w = 1 + static_cast<int>(rng() % 20); w > 0; --w) body += " word" + std::to_string(w);
    mem.append(llm::Message::text(i % 2 ? llm::Role::Assistant : llm::Role::User, body));
    if (i % 6 == 2) {
      sandbox::ExecutionResult r;
      r.declared_bindings = {{"var_" + std::to_string(i), "DataArray"}};
      r.new_artifacts = {{(root / ("figure_" + std::to_string(i) + ".png")).string(), "image/png"}};
      memory::update_ledger(mem.ledger(), r, root);
      mem.ledger().dataset_ids.insert("dataset-" + std::to_string(i));
      memory::record_result(mem.ledger(), "stat_" + std::to_string(i), i * 0.5);
    }
    compressions += mem.maybe_compress();
  }
  c.expect(compressions >= 1, "summarization never fired");
  const auto ctx = mem.context(4000);
  std::string text;
  for (const auto& m : ctx.messages) text += m.joined_text() + "\n";
  const auto keys = mem.ledger().keys();
  for (const auto& key : keys) c.expect(text.find(key) != std::string::npos, "ledger key lost: " + key);
  return verdict(c,
                 std::to_string(compressions) + " summarization(s), " + std::to_string(keys.size()) +
                     " ledger keys kept",
                 since(t0), 60.0);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1_benchmark_ordering},  {"A2", a2_index_correctness}, {"A3", a3_routing_table},
      {"A4", a4_repair_counting},     {"A5", a5_qc_sequences},      {"A6", a6_interpolation},
      {"A7", a7_numerics},            {"A8", a8_isolation_and_replay},
      {"A9", a9_memory_preservation}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const auto ms = static_cast<long>(since(t0) * 1000);
    std::cout << name << ' ' << (out.pass ? "PASS" : "FAIL") << ' ' << out.detail << " (" << ms
              << " ms)" << std::endl;
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
