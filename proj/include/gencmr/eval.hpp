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

#ifndef GENCMR_EVAL_HPP_
#define GENCMR_EVAL_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gencmr/corpus.hpp"
#include "gencmr/decode.hpp"
#include "gencmr/gsv.hpp"
#include "gencmr/lm.hpp"
#include "gencmr/sid.hpp"
#include "gencmr/trie.hpp"

namespace gencmr {

/// 1-based rank of the first ground-truth target, 0 when none is ranked.
std::size_t first_hit_rank(const RankedResult& ranked, const Query& query);

/// Percentage of queries with any ground-truth target in the top k.
double recall_at_k(std::span<const RankedResult> rankings, std::span<const Query> queries, std::size_t k);

struct QueryRank {
  std::string query_id;
  std::size_t rank = 0;  // 0 = miss
};

struct MetricReport {
  double r1 = 0;
  double r5 = 0;
  double rsum = 0;  // r1 + r5
  std::vector<QueryRank> ranks;
  std::string config_echo;  // canonical JSON of the settings
  std::string config_hash;
};

enum class AblationMode { kFull, kNoGsv, kNoSid, kNoGlobal, kNoDedup, kNoConstraint };
std::string_view ablation_name(AblationMode mode);
AblationMode parse_ablation(std::string_view name);

enum class VerifierKind { kNone, kReference, kOracle, kHttp };
std::string_view verifier_kind_name(VerifierKind kind);
VerifierKind parse_verifier_kind(std::string_view name);

struct BenchmarkSettings {
  SidParams sid;
  double epsilon = MemorizingModel::kDefaultEpsilon;
  int beam = 50;
  std::size_t gsv_k = kDefaultGsvK;
  GsvMode gsv = GsvMode::kTopK;
  AblationMode mode = AblationMode::kFull;
  VerifierKind verifier = VerifierKind::kReference;
  bool untrained = false;  // score with a uniform model instead of training
  std::string provider = "hashing";
  std::string verifier_url;
  int threads = 1;
};

/// Canonical JSON of the settings and its FNV-1a hash.
std::string settings_json(const BenchmarkSettings& settings);
std::string hash_hex(std::string_view bytes);

struct BenchmarkData {
  Corpus corpus;
  std::vector<Query> train_queries;
  std::vector<Query> eval_queries;
  std::optional<EmbeddingMatrix<double>> target_embeddings;
};

/// Identifier options wired to each ablation mode.
SidOptions sid_options_for(AblationMode mode);

/// One (query text, identifier) pair per query and ground-truth target.
std::vector<TrainingPair> training_pairs(std::span<const Query> queries, const SidTable& sids);

// Identifiers, trie, model and verifier built once for a data set and
// settings; evaluation can then be repeated at several beam widths.
class Pipeline {
 public:
  Pipeline(const BenchmarkData& data, const BenchmarkSettings& settings);

  const SidTable& sids() const { return sids_; }
  const IdTrie& trie() const { return trie_; }
  const CondTokenModel& model() const { return *model_; }
  const Verifier* verifier() const { return verifier_.get(); }
  RetrieveOptions retrieve_options(int beam) const;

  RankedResult retrieve(std::string_view query, int beam) const;
  MetricReport evaluate(int beam) const;

 private:
  const BenchmarkData& data_;
  BenchmarkSettings settings_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  SidTable sids_;
  IdTrie trie_;
  std::unique_ptr<CondTokenModel> model_;
  std::unique_ptr<Verifier> verifier_;
};

std::unique_ptr<Verifier> make_verifier(const BenchmarkSettings& settings,
                                        std::shared_ptr<const EmbeddingProvider> provider,
                                        std::span<const Query> queries);

MetricReport run_benchmark(const BenchmarkData& data, const BenchmarkSettings& settings);

struct SweepRow {
  int k = 0;
  int m = 0;
  int beam = 0;
  MetricReport report;
};

std::vector<SweepRow> sweep_beam(const BenchmarkData& data, const BenchmarkSettings& settings,
                                 std::span<const int> beams);
std::vector<SweepRow> sweep_identifier(const BenchmarkData& data, const BenchmarkSettings& settings,
                                       std::span<const int> ks, std::span<const int> ms);

// Plain-text and CSV renderings. Numbers use fixed two-decimal formatting so
// repeated runs are byte-identical. Sweep CSV columns: k,m,beam,r1,r5,rsum.
std::string render_report(const MetricReport& report);
std::string report_ranks_csv(const MetricReport& report);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string sweep_table(std::span<const SweepRow> rows);

}  // namespace gencmr

#endif  // GENCMR_EVAL_HPP_
