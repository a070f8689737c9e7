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

#include "gencmr/vocab.hpp"

#include <algorithm>

#include "gencmr/error.hpp"

namespace gencmr {

Vocabulary::Vocabulary() : Vocabulary(std::span<const std::string>{}) {}

Vocabulary::Vocabulary(std::span<const std::string> tokens)
    : tokens_(tokens.begin(), tokens.end()) {
  tokens_.emplace_back(kEos);
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
  index_.reserve(tokens_.size());
  for (TokenId i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
  eos_ = index_.at(std::string(kEos));
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw Error(ErrorCode::kInvalidArgument, "token not in vocabulary: '" + std::string(token) + "'");
}

TokenSeq Vocabulary::encode(std::span<const std::string> tokens) const {
  TokenSeq ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (const TokenId i : ids) out.push_back(token(i));
  return out;
}

}  // namespace gencmr
