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

#include "gencmr/gsv.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "gencmr/error.hpp"
#include "gencmr/text.hpp"

namespace gencmr {

std::vector<Candidate> aggregate_candidates(const RankedResult& ranked, std::size_t k,
                                            const Corpus& corpus, const SidTable& sids) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "candidate set size must be >= 1");
  std::vector<Candidate> out;
  const std::size_t n = std::min(k, ranked.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RankedEntry& e = ranked.entries[i];
    Candidate c;
    c.target_id = e.target_id;
    c.tokens = e.tokens;
    c.lexical = sids.at(e.target_id).sid.lexical;
    c.score = e.score;
    c.descriptor = corpus.at(e.target_id).descriptor;
    out.push_back(std::move(c));
  }
  return out;
}

std::string_view prompt_instruction(Direction direction) {
  return direction == Direction::kToImage
             ? "Please select the image that best matches the last sentence based on the image with its keywords."
             : "Please select the sentence that best matches the last image based on the sentence with its keywords.";
}

std::string build_prompt(std::string_view query, std::span<const Candidate> candidates,
                         Direction direction) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyInput, "no candidates to verify");
  const bool to_image = direction == Direction::kToImage;
  std::string out = to_image ? "Image:\n" : "Sentence:\n";
  for (const auto& c : candidates) {
    out += c.descriptor;
    out += "; ";
    out += join(c.lexical, " ");
    out += ".\n";
  }
  out += to_image ? "Sentence: " : "Image: ";
  out += query;
  out += ".\n";
  out += prompt_instruction(direction);
  out += '\n';
  return out;
}

EmbeddingVerifier::EmbeddingVerifier(std::shared_ptr<const EmbeddingProvider> provider)
    : provider_(std::move(provider)) {
  if (!provider_) throw Error(ErrorCode::kInvalidArgument, "embedding provider required");
}

std::vector<std::optional<double>> EmbeddingVerifier::score(std::string_view query,
                                                            std::span<const Candidate> candidates,
                                                            Direction) const {
  const Eigen::VectorXd q = provider_->embed(query);
  std::vector<std::optional<double>> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    const Eigen::VectorXd v = provider_->embed(c.descriptor + " " + join(c.lexical, " "));
    if (q.norm() == 0 || v.norm() == 0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(cosine(q, v));
    }
  }
  return out;
}

OracleVerifier::OracleVerifier(std::span<const Query> queries) {
  for (const auto& q : queries) gt_[q.text].insert(q.gt_targets.begin(), q.gt_targets.end());
}

std::vector<std::optional<double>> OracleVerifier::score(std::string_view query,
                                                         std::span<const Candidate> candidates,
                                                         Direction) const {
  const auto it = gt_.find(query);
  std::vector<std::optional<double>> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.emplace_back(it != gt_.end() && it->second.contains(c.target_id) ? 1.0 : 0.0);
  }
  return out;
}

std::vector<Candidate> verify(const Verifier& verifier, std::string_view query,
                              std::span<const Candidate> candidates, Direction direction,
                              std::ostream* log) {
  std::ostream& out_log = log ? *log : std::clog;
  std::vector<std::optional<double>> scores;
  try {
    scores = verifier.score(query, candidates, direction);
    if (scores.size() != candidates.size()) {
      throw Error(ErrorCode::kVerifierFailure, "verifier returned " + std::to_string(scores.size()) +
                                                   " scores for " + std::to_string(candidates.size()) +
                                                   " candidates");
    }
  } catch (const Error& e) {
    out_log << "verifier " << verifier.name() << " failed: " << e.what() << '\n';
    scores.assign(candidates.size(), std::nullopt);
  }

  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (scores[i]) {
      scored.push_back(i);
    } else {
      out_log << "VerifierFailure: " << candidates[i].target_id << " keeps rank " << i + 1 << '\n';
    }
  }
  std::vector<std::size_t> sorted = scored;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](std::size_t a, std::size_t b) { return *scores[a] > *scores[b]; });

  std::vector<Candidate> out(candidates.begin(), candidates.end());
  for (std::size_t j = 0; j < scored.size(); ++j) out[scored[j]] = candidates[sorted[j]];
  return out;
}

std::string_view gsv_mode_name(GsvMode mode) {
  switch (mode) {
    case GsvMode::kOff: return "off";
    case GsvMode::kTopK: return "topk";
    case GsvMode::kCollisions: return "collisions";
  }
  return "off";
}

GsvMode parse_gsv_mode(std::string_view name) {
  if (name == "off") return GsvMode::kOff;
  if (name == "topk") return GsvMode::kTopK;
  if (name == "collisions") return GsvMode::kCollisions;
  throw Error(ErrorCode::kInvalidArgument, "unknown GSV mode '" + std::string(name) + "'");
}

namespace {

void rerank_slice(RankedResult& ranked, std::size_t begin, std::size_t end, const RetrievalIndex& index,
                  const Verifier& verifier, std::string_view query, std::ostream* log) {
  RankedResult slice;
  slice.entries.assign(ranked.entries.begin() + static_cast<std::ptrdiff_t>(begin),
                       ranked.entries.begin() + static_cast<std::ptrdiff_t>(end));
  const auto candidates = aggregate_candidates(slice, slice.size(), index.corpus, index.sids);
  const auto reordered = verify(verifier, query, candidates, index.corpus.direction(), log);
  for (std::size_t i = 0; i < reordered.size(); ++i) {
    RankedEntry& e = ranked.entries[begin + i];
    e.target_id = reordered[i].target_id;
    e.score = reordered[i].score;
    e.tokens = reordered[i].tokens;
  }
}

}  // namespace

RankedResult retrieve(std::string_view query, const RetrievalIndex& index, const Verifier* verifier,
                      const RetrieveOptions& options, std::ostream* log) {
  std::vector<ScoredSequence> sequences;
  if (options.constrained) {
    sequences = constrained_beam_search(index.model, index.trie, query, options.beam);
  } else {
    const std::size_t max_length = options.max_length ? options.max_length : index.trie.max_depth();
    sequences = unconstrained_beam_search(index.model, query, options.beam, max_length);
  }
  RankedResult ranked = expand_to_targets(index.trie, sequences);
  if (verifier == nullptr || options.gsv == GsvMode::kOff || ranked.entries.empty()) return ranked;

  const std::size_t top = std::min(options.gsv_k, ranked.size());
  if (options.gsv == GsvMode::kTopK) {
    rerank_slice(ranked, 0, top, index, *verifier, query, log);
    return ranked;
  }
  // Collision groups expand to adjacent entries with identical identifiers.
  std::size_t begin = 0;
  while (begin < top) {
    std::size_t end = begin + 1;
    while (end < top && ranked.entries[end].tokens == ranked.entries[begin].tokens) ++end;
    if (end - begin > 1) rerank_slice(ranked, begin, end, index, *verifier, query, log);
    begin = end;
  }
  return ranked;
}

}  // namespace gencmr
