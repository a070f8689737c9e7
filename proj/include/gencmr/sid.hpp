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

#ifndef GENCMR_SID_HPP_
#define GENCMR_SID_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gencmr/corpus.hpp"
#include "gencmr/embed.hpp"
#include "gencmr/kmeans.hpp"

namespace gencmr {

/// Lexical padding token used when a descriptor has fewer than m content words.
inline constexpr std::string_view kPadToken = "pad";

struct WeightedWord {
  std::string word;
  double weight = 0;
};

// Cluster-as-document TF-IDF: weight(x, c) = tf(x, c) * ln(1 + A / f(x))
// where tf is the raw count of x in cluster c's concatenated descriptors,
// f(x) the number of clusters containing x and A the mean word count per
// cluster (over all k clusters).
struct ClusterKeywords {
  std::vector<std::vector<WeightedWord>> ranked;  // weight desc, then word asc
  std::vector<std::vector<std::string>> banned;   // top-M of `ranked`
  double average_words = 0;
};

struct TfidfOptions {
  /// Function words are counted in tf, f and A but never ranked.
  bool rank_stopwords = false;
};

ClusterKeywords cluster_tfidf(std::span<const std::vector<std::string>> cluster_documents,
                              int banned_size, const TfidfOptions& options = {});
ClusterKeywords cluster_tfidf(const Corpus& corpus, std::span<const int> labels, int k,
                              int banned_size, const TfidfOptions& options = {});

/// Global token per cluster: the highest-ranked word not claimed by a
/// lower-indexed cluster, else the synthetic token "c<index>".
std::vector<std::string> assign_global_tokens(const ClusterKeywords& keywords);
std::string global_id_token(int cluster_index, const ClusterKeywords& keywords);

struct LexicalCandidate {
  std::string phrase;
  std::vector<std::string> words;
  double similarity = 0;
};

/// Every distinct 1..ngram_max word n-gram of the descriptor that contains
/// no function word and no banned word, ranked by cosine to the whole
/// descriptor (desc), ties by phrase (asc).
std::vector<LexicalCandidate> rank_lexical_candidates(std::string_view descriptor,
                                                      const EmbeddingProvider& provider,
                                                      const std::set<std::string>& banned,
                                                      int ngram_max);

/// Greedy flattening of the ranked candidates into exactly m word tokens:
/// phrases repeating an already chosen word are skipped, the last phrase is
/// truncated, and the tail is padded with kPadToken.
std::vector<std::string> extract_lexical_id(std::string_view descriptor,
                                            const EmbeddingProvider& provider,
                                            const std::set<std::string>& banned, int ngram_max,
                                            int m);

struct StructuredIdentifier {
  std::string global;  // empty when the global token is ablated
  std::vector<std::string> lexical;
  std::string suffix;  // only set by collision suffixing

  /// [global] ++ lexical ++ [suffix] ++ [EOS], omitting empty parts.
  std::vector<std::string> tokens() const;
  bool operator==(const StructuredIdentifier&) const = default;
};

struct CollisionGroup {
  std::vector<std::string> tokens;
  std::vector<std::string> members;  // corpus order
};

struct SidParams {
  int k = 128;
  int m = 4;
  int banned_size = 5;
  int ngram_max = 3;
  int max_iter = 100;
  std::uint64_t seed = 0;  // k-means seed
};

// Identifier ablations. Defaults build the full identifier.
struct SidOptions {
  bool global = true;            // false: drop the global token
  bool dedup = true;             // false: ignore banned sets
  bool serial_lexical = false;   // true: lexical ID is one per-target serial number
  bool suffix_collisions = false;  // true: append 1, 2, ... to colliding identifiers
};

struct SidEntry {
  std::string target_id;
  int cluster = 0;
  StructuredIdentifier sid;
  int collision_group = -1;
};

struct SidTable {
  std::vector<SidEntry> entries;  // corpus order
  std::vector<CollisionGroup> collisions;
  std::vector<std::string> global_tokens;  // per cluster
  std::vector<std::vector<std::string>> banned;  // per cluster

  std::optional<std::size_t> index_of(std::string_view target_id) const;
  const SidEntry& at(std::string_view target_id) const;
  /// Every token appearing in any identifier, EOS included.
  std::vector<std::string> token_inventory() const;
};

/// Groups identical full token sequences; groups ordered by first member.
std::vector<CollisionGroup> find_collisions(std::span<const SidEntry> entries);

/// Assembles identifiers from prebuilt clustering and keywords.
SidTable assemble_sids(const Corpus& corpus, std::span<const int> labels,
                       const ClusterKeywords& keywords, const EmbeddingProvider& provider,
                       const SidParams& params, const SidOptions& options = {});

/// Full construction: embed descriptors (or use `target_embeddings`),
/// cluster, keyword the clusters, extract lexical IDs, assemble.
SidTable build_sids(const Corpus& corpus, const EmbeddingProvider& provider,
                    const SidParams& params, const SidOptions& options = {},
                    const EmbeddingMatrix<double>* target_embeddings = nullptr);

// JSONL persistence. The first line is a header record
// {"format":"gencmr.sid","version":1,"config_hash":...,"params":{...}}; each
// following line is {"target_id","cluster","global","lexical","suffix",
// "collisions_group"}.
struct SidFileHeader {
  std::string config_hash;
  std::string corpus_hash;
  SidParams params;
  SidOptions options;
  std::string provider;
};

void write_sid_table(std::ostream& out, const SidTable& table, const SidFileHeader& header);
void save_sid_table(const std::filesystem::path& path, const SidTable& table,
                    const SidFileHeader& header);
SidTable load_sid_table(const std::filesystem::path& path, SidFileHeader* header = nullptr);

}  // namespace gencmr

#endif  // GENCMR_SID_HPP_
