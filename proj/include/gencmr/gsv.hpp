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

#ifndef GENCMR_GSV_HPP_
#define GENCMR_GSV_HPP_

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gencmr/corpus.hpp"
#include "gencmr/decode.hpp"
#include "gencmr/embed.hpp"
#include "gencmr/sid.hpp"

namespace gencmr {

/// Candidate set size used for verification unless configured otherwise.
inline constexpr std::size_t kDefaultGsvK = 10;

struct Candidate {
  std::string target_id;
  std::vector<std::string> tokens;   // full identifier
  std::vector<std::string> lexical;  // lexical part only
  double score = 0;                  // generation log-probability
  std::string descriptor;
};

/// Top-K ranked targets (collisions already expanded) with descriptors and
/// lexical IDs attached.
std::vector<Candidate> aggregate_candidates(const RankedResult& ranked, std::size_t k,
                                            const Corpus& corpus, const SidTable& sids);

/// Verification prompt, byte-exact:
///   "Image:\n" then "<descriptor>; <lexical tokens>.\n" per candidate in rank
///   order, "Sentence: <query>.\n", and the instruction line. The to_text
///   direction swaps the roles of image and sentence.
std::string build_prompt(std::string_view query, std::span<const Candidate> candidates,
                         Direction direction);

/// Instruction line closing the prompt, without the trailing newline.
std::string_view prompt_instruction(Direction direction);

// Scores query/candidate relevance for re-ranking. A missing score marks a
// per-candidate failure; throwing gencmr::Error fails the whole batch.
class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::optional<double>> score(std::string_view query,
                                                   std::span<const Candidate> candidates,
                                                   Direction direction) const = 0;
};

/// Cosine between the query embedding and the embedding of
/// "<descriptor> <lexical tokens>".
class EmbeddingVerifier final : public Verifier {
 public:
  explicit EmbeddingVerifier(std::shared_ptr<const EmbeddingProvider> provider);
  std::string name() const override { return "reference"; }
  std::vector<std::optional<double>> score(std::string_view query, std::span<const Candidate> candidates,
                                           Direction direction) const override;

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
};

/// 1 for ground-truth targets of the query text, 0 otherwise.
class OracleVerifier final : public Verifier {
 public:
  explicit OracleVerifier(std::span<const Query> queries);
  std::string name() const override { return "oracle"; }
  std::vector<std::optional<double>> score(std::string_view query, std::span<const Candidate> candidates,
                                           Direction direction) const override;

 private:
  std::map<std::string, std::set<std::string>, std::less<>> gt_;
};

class ConstantVerifier final : public Verifier {
 public:
  explicit ConstantVerifier(double value) : value_(value) {}
  std::string name() const override { return "constant"; }
  std::vector<std::optional<double>> score(std::string_view, std::span<const Candidate> candidates,
                                           Direction) const override {
    return std::vector<std::optional<double>>(candidates.size(), value_);
  }

 private:
  double value_;
};

// JSON over HTTP: POST {"prompt": str, "candidate_ids": [str], "query": str}
// to `url`; the reply is {"scores": [number|null, ...]} aligned with
// candidate_ids. Transport errors and timeouts fail the whole batch.
class HttpVerifier final : public Verifier {
 public:
  HttpVerifier(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::string name() const override { return "http"; }
  std::vector<std::optional<double>> score(std::string_view query, std::span<const Candidate> candidates,
                                           Direction direction) const override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

/// Environment variable holding the external verifier endpoint.
inline constexpr const char* kVerifierUrlEnv = "GENCMR_VERIFIER_URL";

/// Stable re-sort by verifier score, descending. Candidates whose score
/// failed keep their incoming position; failures are reported on `log`.
std::vector<Candidate> verify(const Verifier& verifier, std::string_view query,
                              std::span<const Candidate> candidates, Direction direction,
                              std::ostream* log = nullptr);

enum class GsvMode { kOff, kTopK, kCollisions };

std::string_view gsv_mode_name(GsvMode mode);
GsvMode parse_gsv_mode(std::string_view name);

/// Everything retrieval reads. All members must outlive the index.
struct RetrievalIndex {
  const Corpus& corpus;
  const SidTable& sids;
  const IdTrie& trie;
  const CondTokenModel& model;
};

struct RetrieveOptions {
  int beam = 50;
  std::size_t gsv_k = kDefaultGsvK;
  GsvMode gsv = GsvMode::kTopK;
  bool constrained = true;
  std::size_t max_length = 0;  // unconstrained only; 0 = longest identifier
};

/// Decode, expand collisions, then (with a verifier and gsv != off)
/// re-rank the top gsv_k. Ranks past gsv_k keep generation order.
RankedResult retrieve(std::string_view query, const RetrievalIndex& index, const Verifier* verifier,
                      const RetrieveOptions& options, std::ostream* log = nullptr);

}  // namespace gencmr

#endif  // GENCMR_GSV_HPP_
