// Copyright 2026 The gencmr Authors.
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

#include "gencmr/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gencmr/error.hpp"
#include "gencmr/text.hpp"

namespace gencmr {

using nlohmann::json;

std::size_t first_hit_rank(const RankedResult& ranked, const Query& query) {
  const std::unordered_set<std::string> gt(query.gt_targets.begin(), query.gt_targets.end());
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    if (gt.contains(ranked.entries[i].target_id)) return i + 1;
  }
  return 0;
}

double recall_at_k(std::span<const RankedResult> rankings, std::span<const Query> queries, std::size_t k) {
  if (queries.empty()) throw Error(ErrorCode::kNoQueries, "recall over no queries");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (rankings.size() != queries.size()) throw Error(ErrorCode::kShapeMismatch, "one ranking per query required");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::size_t rank = first_hit_rank(rankings[i], queries[i]);
    if (rank != 0 && rank <= k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(queries.size());
}

std::string_view ablation_name(AblationMode mode) {
  switch (mode) {
    case AblationMode::kFull: return "full";
    case AblationMode::kNoGsv: return "no_gsv";
    case AblationMode::kNoSid: return "no_sid";
    case AblationMode::kNoGlobal: return "no_global";
    case AblationMode::kNoDedup: return "no_dedup";
    case AblationMode::kNoConstraint: return "no_constraint";
  }
  return "full";
}

AblationMode parse_ablation(std::string_view name) {
  for (const auto mode : {AblationMode::kFull, AblationMode::kNoGsv, AblationMode::kNoSid,
                          AblationMode::kNoGlobal, AblationMode::kNoDedup, AblationMode::kNoConstraint}) {
    if (ablation_name(mode) == name) return mode;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(name) + "'");
}

std::string_view verifier_kind_name(VerifierKind kind) {
  switch (kind) {
    case VerifierKind::kNone: return "none";
    case VerifierKind::kReference: return "reference";
    case VerifierKind::kOracle: return "oracle";
    case VerifierKind::kHttp: return "http";
  }
  return "none";
}

VerifierKind parse_verifier_kind(std::string_view name) {
  for (const auto kind : {VerifierKind::kNone, VerifierKind::kReference, VerifierKind::kOracle, VerifierKind::kHttp}) {
    if (verifier_kind_name(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown verifier '" + std::string(name) + "'");
}

std::string settings_json(const BenchmarkSettings& s) {
  const json j = {{"k", s.sid.k},
                  {"m", s.sid.m},
                  {"banned_size", s.sid.banned_size},
                  {"ngram_max", s.sid.ngram_max},
                  {"max_iter", s.sid.max_iter},
                  {"kmeans_seed", s.sid.seed},
                  {"epsilon", s.epsilon},
                  {"beam", s.beam},
                  {"gsv_k", s.gsv_k},
                  {"gsv", gsv_mode_name(s.gsv)},
                  {"mode", ablation_name(s.mode)},
                  {"verifier", verifier_kind_name(s.verifier)},
                  {"untrained", s.untrained},
                  {"provider", s.provider}};
  return j.dump();
}

std::string hash_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

SidOptions sid_options_for(AblationMode mode) {
  SidOptions o;
  switch (mode) {
    case AblationMode::kNoGsv: o.suffix_collisions = true; break;
    case AblationMode::kNoSid: o.serial_lexical = true; break;
    case AblationMode::kNoGlobal: o.global = false; break;
    case AblationMode::kNoDedup: o.dedup = false; break;
    case AblationMode::kFull:
    case AblationMode::kNoConstraint: break;
  }
  return o;
}

std::vector<TrainingPair> training_pairs(std::span<const Query> queries, const SidTable& sids) {
  std::vector<TrainingPair> pairs;
  for (const auto& q : queries) {
    for (const auto& id : q.gt_targets) pairs.push_back({q.text, sids.at(id).sid.tokens()});
  }
  return pairs;
}

std::unique_ptr<Verifier> make_verifier(const BenchmarkSettings& settings,
                                        std::shared_ptr<const EmbeddingProvider> provider,
                                        std::span<const Query> queries) {
  switch (settings.verifier) {
    case VerifierKind::kNone: return nullptr;
    case VerifierKind::kReference: return std::make_unique<EmbeddingVerifier>(std::move(provider));
    case VerifierKind::kOracle: return std::make_unique<OracleVerifier>(queries);
    case VerifierKind::kHttp: {
      std::string url = settings.verifier_url;
      if (url.empty()) {
        if (const char* env = std::getenv(kVerifierUrlEnv)) url = env;
      }
      if (url.empty()) {
        throw Error(ErrorCode::kInvalidArgument, std::string("http verifier needs a URL (") + kVerifierUrlEnv + ")");
      }
      return std::make_unique<HttpVerifier>(url);
    }
  }
  return nullptr;
}

Pipeline::Pipeline(const BenchmarkData& data, const BenchmarkSettings& settings)
    : data_(data), settings_(settings), provider_(make_provider(settings.provider)) {
  sids_ = build_sids(data.corpus, *provider_, settings.sid, sid_options_for(settings.mode),
                     data.target_embeddings ? &*data.target_embeddings : nullptr);
  trie_ = IdTrie::build(sids_);
  const auto inventory = sids_.token_inventory();
  if (settings.untrained) {
    model_ = std::make_unique<UniformModel>(Vocabulary(inventory));
  } else {
    const auto pairs = training_pairs(data.train_queries, sids_);
    model_ = std::make_unique<MemorizingModel>(
        MemorizingModel::train(pairs, settings.epsilon, provider_, inventory));
  }
  if (settings.mode != AblationMode::kNoGsv && settings.gsv != GsvMode::kOff) {
    verifier_ = make_verifier(settings, provider_, data.eval_queries);
  }
}

RetrieveOptions Pipeline::retrieve_options(int beam) const {
  RetrieveOptions o;
  o.beam = beam;
  o.gsv_k = settings_.gsv_k;
  o.gsv = settings_.mode == AblationMode::kNoGsv ? GsvMode::kOff : settings_.gsv;
  o.constrained = settings_.mode != AblationMode::kNoConstraint;
  return o;
}

RankedResult Pipeline::retrieve(std::string_view query, int beam) const {
  const RetrievalIndex index{data_.corpus, sids_, trie_, *model_};
  return gencmr::retrieve(query, index, verifier_.get(), retrieve_options(beam));
}

MetricReport Pipeline::evaluate(int beam) const {
  const auto& queries = data_.eval_queries;
  if (queries.empty()) throw Error(ErrorCode::kNoQueries, "no evaluation queries");
  std::vector<RankedResult> rankings(queries.size());
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) rankings[i] = retrieve(queries[i].text, beam);
  };
  const std::size_t threads = static_cast<std::size_t>(std::max(1, settings_.threads));
  if (threads == 1) {
    run(0, queries.size());
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (queries.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < queries.size(); begin += chunk) {
      jobs.push_back(std::async(std::launch::async, run, begin, std::min(queries.size(), begin + chunk)));
    }
    for (auto& j : jobs) j.get();
  }

  MetricReport report;
  report.r1 = recall_at_k(rankings, queries, 1);
  report.r5 = recall_at_k(rankings, queries, 5);
  report.rsum = report.r1 + report.r5;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    report.ranks.push_back({queries[i].query_id, first_hit_rank(rankings[i], queries[i])});
  }
  BenchmarkSettings echo = settings_;
  echo.beam = beam;
  report.config_echo = settings_json(echo);
  report.config_hash = hash_hex(report.config_echo);
  return report;
}

MetricReport run_benchmark(const BenchmarkData& data, const BenchmarkSettings& settings) {
  return Pipeline(data, settings).evaluate(settings.beam);
}

std::vector<SweepRow> sweep_beam(const BenchmarkData& data, const BenchmarkSettings& settings,
                                 std::span<const int> beams) {
  if (beams.empty()) throw Error(ErrorCode::kInvalidArgument, "empty beam axis");
  const Pipeline pipeline(data, settings);
  std::vector<SweepRow> rows;
  for (const int b : beams) rows.push_back({settings.sid.k, settings.sid.m, b, pipeline.evaluate(b)});
  return rows;
}

std::vector<SweepRow> sweep_identifier(const BenchmarkData& data, const BenchmarkSettings& settings,
                                       std::span<const int> ks, std::span<const int> ms) {
  if (ks.empty() || ms.empty()) throw Error(ErrorCode::kInvalidArgument, "empty identifier axis");
  std::vector<SweepRow> rows;
  for (const int k : ks) {
    for (const int m : ms) {
      BenchmarkSettings s = settings;
      s.sid.k = k;
      s.sid.m = m;
      rows.push_back({k, m, s.beam, run_benchmark(data, s)});
    }
  }
  return rows;
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string render_report(const MetricReport& r) {
  std::ostringstream out;
  out << "gencmr report v1\n"
      << "config_hash: " << r.config_hash << '\n'
      << "config: " << r.config_echo << '\n'
      << "queries: " << r.ranks.size() << '\n'
      << "R@1: " << fixed2(r.r1) << '\n'
      << "R@5: " << fixed2(r.r5) << '\n'
      << "rSum: " << fixed2(r.rsum) << '\n';
  return out.str();
}

std::string report_ranks_csv(const MetricReport& r) {
  std::ostringstream out;
  out << "query_id,rank\n";
  for (const auto& q : r.ranks) out << q.query_id << ',' << q.rank << '\n';
  return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "k,m,beam,r1,r5,rsum\n";
  for (const auto& row : rows) {
    out << row.k << ',' << row.m << ',' << row.beam << ',' << fixed2(row.report.r1) << ','
        << fixed2(row.report.r5) << ',' << fixed2(row.report.rsum) << '\n';
  }
  return out.str();
}

std::string sweep_table(std::span<const SweepRow> rows) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%6s %4s %6s %8s %8s %8s\n", "k", "m", "beam", "R@1", "R@5", "rSum");
  out << line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%6d %4d %6d %8.2f %8.2f %8.2f\n", row.k, row.m, row.beam,
                  row.report.r1, row.report.r5, row.report.rsum);
    out << line;
  }
  return out.str();
}

}  // namespace gencmr
