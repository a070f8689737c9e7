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

#ifndef GENCMR_TESTS_HELPERS_HPP_
#define GENCMR_TESTS_HELPERS_HPP_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gencmr/lm.hpp"
#include "gencmr/text.hpp"
#include "gencmr/trie.hpp"
#include "gencmr/vocab.hpp"

namespace gencmr::testing {

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("gencmr_" + name + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Pseudo-random but deterministic log-probability rows: logits hashed from
// (salt, query, prefix, token), then log-softmax.
inline Eigen::MatrixXd hashed_logprobs(std::size_t vocab_size, std::string_view query,
                                       std::span<const TokenSeq> prefixes, std::uint64_t salt) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(prefixes.size()), static_cast<Eigen::Index>(vocab_size));
  for (std::size_t r = 0; r < prefixes.size(); ++r) {
    std::string key(query);
    for (const auto id : prefixes[r]) key += "|" + std::to_string(id);
    for (std::size_t t = 0; t < vocab_size; ++t) {
      const std::uint64_t h = fnv1a64(key + "#" + std::to_string(t), salt);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
          4.0 * static_cast<double>(h >> 11) * 0x1.0p-53;
    }
    auto row = out.row(static_cast<Eigen::Index>(r));
    const double mx = row.maxCoeff();
    const double lse = mx + std::log((row.array() - mx).exp().sum());
    row.array() -= lse;
  }
  return out;
}

inline ExternalScorerModel hashed_model(const Vocabulary& vocab, std::uint64_t salt) {
  const std::size_t n = vocab.size();
  return ExternalScorerModel(vocab, [n, salt](std::string_view q, std::span<const TokenSeq> prefixes) {
    return hashed_logprobs(n, q, prefixes, salt);
  });
}

// Random identifier sequences: one global token out of `globals`, `m`
// lexical tokens out of `words`, then EOS. Duplicates are allowed only when
// `allow_collisions` is set.
inline std::vector<OwnedSequence> random_sequences(std::size_t n, std::size_t globals, std::size_t words,
                                                   std::size_t m, std::mt19937_64& rng,
                                                   bool allow_collisions = false) {
  std::vector<OwnedSequence> out;
  std::vector<std::vector<std::string>> seen;
  while (out.size() < n) {
    std::vector<std::string> tokens{"g" + std::to_string(rng() % globals)};
    for (std::size_t i = 0; i < m; ++i) tokens.push_back("w" + std::to_string(rng() % words));
    tokens.emplace_back(kEos);
    if (!allow_collisions && std::find(seen.begin(), seen.end(), tokens) != seen.end()) continue;
    seen.push_back(tokens);
    char id[16];
    std::snprintf(id, sizeof(id), "t%03zu", out.size());
    out.push_back({id, tokens});
  }
  return out;
}

inline std::vector<std::string> sequence_inventory(std::span<const OwnedSequence> seqs) {
  std::vector<std::string> all;
  for (const auto& s : seqs) all.insert(all.end(), s.tokens.begin(), s.tokens.end());
  return all;
}

}  // namespace gencmr::testing

#endif  // GENCMR_TESTS_HELPERS_HPP_
