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

#ifndef GENCMR_DECODE_HPP_
#define GENCMR_DECODE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gencmr/lm.hpp"
#include "gencmr/trie.hpp"

namespace gencmr {

struct ScoredSequence {
  std::vector<std::string> tokens;
  double logprob = 0;
  bool finished = true;  // false only for unconstrained hypotheses cut at the length limit
};

struct RankedEntry {
  std::string target_id;
  double score = 0;  // generation log-probability
  std::vector<std::string> tokens;
};

/// Ranked targets, scores non-increasing, no duplicate target ids.
struct RankedResult {
  std::vector<RankedEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// Largest corpus brute_force_rank accepts.
inline constexpr std::size_t kBruteForceLimit = 4096;

// Beam search restricted to trie paths. Each step expands every live beam
// over its valid next tokens and keeps the global top `beam` of finished and
// new hypotheses, ordered by cumulative log-probability and then by token
// sequence. Hypotheses that emit EOS are frozen but keep competing.
std::vector<ScoredSequence> constrained_beam_search(const CondTokenModel& model, const IdTrie& trie,
                                                    std::string_view query, int beam);

// Same search over the whole model vocabulary. Hypotheses still open after
// `max_length` tokens are returned unfinished.
std::vector<ScoredSequence> unconstrained_beam_search(const CondTokenModel& model,
                                                      std::string_view query, int beam,
                                                      std::size_t max_length);

/// sum_i log p(tokens_i | tokens_<i, query), accumulated left to right.
double log_relevance(const CondTokenModel& model, std::string_view query,
                     std::span<const std::string> tokens);
/// Product of the conditional token probabilities of a complete sequence.
double relevance(const CondTokenModel& model, std::string_view query,
                 std::span<const std::string> tokens);

/// Maps sequences to their owners. Collisions contribute one entry per
/// target in target_id order; sequences that are not identifiers are dropped.
RankedResult expand_to_targets(const IdTrie& trie, std::span<const ScoredSequence> sequences);

/// Exact relevance of every identifier, ranked with the beam search order.
RankedResult brute_force_rank(const CondTokenModel& model, const IdTrie& trie, std::string_view query);

/// All root-to-terminal identifier sequences of the trie, in token order.
std::vector<std::vector<std::string>> enumerate_sequences(const IdTrie& trie);

}  // namespace gencmr

#endif  // GENCMR_DECODE_HPP_
