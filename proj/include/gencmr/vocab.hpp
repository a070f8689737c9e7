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

#ifndef GENCMR_VOCAB_HPP_
#define GENCMR_VOCAB_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gencmr {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

/// End-of-identifier token. The tokenizer never emits it.
inline constexpr std::string_view kEos = "</s>";

// Sorted, deduplicated token inventory. Ids follow byte-wise string order,
// so comparing id sequences lexicographically is the same as comparing the
// token strings. kEos is always present.
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(std::span<const std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const;  // throws kInvalidArgument
  TokenId eos() const { return eos_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenSeq encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_ = 0;
};

}  // namespace gencmr

#endif  // GENCMR_VOCAB_HPP_
