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

#ifndef GENCMR_LM_HPP_
#define GENCMR_LM_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gencmr/embed.hpp"
#include "gencmr/vocab.hpp"

namespace gencmr {

// Conditional next-token distribution over identifier tokens given a query
// and the tokens generated so far. Every returned row is a log-probability
// vector over vocabulary() whose exponentials sum to one.
class CondTokenModel {
 public:
  virtual ~CondTokenModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  /// Batched scoring: row r is the distribution after prefixes[r].
  /// Prefix ids are ids of vocabulary().
  virtual Eigen::MatrixXd score(std::string_view query, std::span<const TokenSeq> prefixes) const = 0;

  Eigen::VectorXd next_token_logprobs(std::string_view query, std::span<const TokenId> prefix) const;
};

class UniformModel final : public CondTokenModel {
 public:
  explicit UniformModel(Vocabulary vocab) : vocab_(std::move(vocab)) {}
  const Vocabulary& vocabulary() const override { return vocab_; }
  Eigen::MatrixXd score(std::string_view query, std::span<const TokenSeq> prefixes) const override;

 private:
  Vocabulary vocab_;
};

/// External scorer seam: the callback returns one log-probability row per
/// prefix. Rows are checked for shape and normalization.
using BatchScorer =
    std::function<Eigen::MatrixXd(std::string_view query, std::span<const TokenSeq> prefixes)>;

class ExternalScorerModel final : public CondTokenModel {
 public:
  ExternalScorerModel(Vocabulary vocab, BatchScorer scorer, double tolerance = 1e-6);
  const Vocabulary& vocabulary() const override { return vocab_; }
  Eigen::MatrixXd score(std::string_view query, std::span<const TokenSeq> prefixes) const override;

 private:
  Vocabulary vocab_;
  BatchScorer scorer_;
  double tolerance_;
};

struct TrainingPair {
  std::string query;
  std::vector<std::string> tokens;  // ends with EOS
};

// Count-based conditional model keyed by (training query, prefix), with
// additive smoothing:
//   p(t | key, prefix) = (count(t) + eps) / (total + eps * |V|).
// A query that is not a training query backs off to the training query with
// the highest embedding cosine (ties: lower key index, keys are sorted).
// A (key, prefix) without counts falls back to the nearest other training
// query's counts, then to the uniform distribution.
class MemorizingModel final : public CondTokenModel {
 public:
  static constexpr double kDefaultEpsilon = 0.01;

  /// Vocabulary = tokens of all pairs, `extra_vocabulary`, and EOS.
  static MemorizingModel train(std::span<const TrainingPair> pairs, double epsilon,
                               std::shared_ptr<const EmbeddingProvider> provider,
                               std::span<const std::string> extra_vocabulary = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  Eigen::MatrixXd score(std::string_view query, std::span<const TokenSeq> prefixes) const override;

  double epsilon() const { return epsilon_; }
  const std::vector<std::string>& keys() const { return keys_; }
  const EmbeddingProvider& provider() const { return *provider_; }

  /// Index of the training query equal to the NFC form of `query`.
  std::optional<std::size_t> exact_key(std::string_view query) const;
  /// Training query with the highest cosine to `query`, skipping `exclude`.
  std::optional<std::size_t> nearest_key(std::string_view query,
                                         std::optional<std::size_t> exclude = std::nullopt) const;

  /// Raw next-token counts for (key, prefix); empty when never observed.
  std::vector<std::pair<TokenId, std::uint32_t>> counts(std::size_t key, std::span<const TokenId> prefix) const;

  void save(const std::filesystem::path& path, std::string_view config_hash) const;
  /// Throws kConfigMismatch when `expected_hash` is given and differs.
  static MemorizingModel load(const std::filesystem::path& path,
                              std::optional<std::string_view> expected_hash = std::nullopt,
                              std::string* stored_hash = nullptr);

 private:
  struct Counts {
    std::vector<std::pair<TokenId, std::uint32_t>> next;  // sorted by token
    std::uint64_t total = 0;
  };

  static std::string context_key(std::uint32_t key, std::span<const TokenId> prefix);
  void index_keys();
  const Counts* find(std::size_t key, std::span<const TokenId> prefix) const;

  Vocabulary vocab_;
  double epsilon_ = kDefaultEpsilon;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> key_index_;
  RowMatrix<double> key_embeddings_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::unordered_map<std::string, Counts> table_;
};

/// Mean over pairs of -sum_i log p(token_i | token_<i, query).
double nll(const CondTokenModel& model, std::span<const TrainingPair> pairs);

}  // namespace gencmr

#endif  // GENCMR_LM_HPP_
