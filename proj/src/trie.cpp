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

#include "gencmr/trie.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "gencmr/error.hpp"

namespace gencmr {

IdTrie IdTrie::build(std::span<const OwnedSequence> sequences) {
  IdTrie trie;
  std::set<std::string> tokens;
  for (const auto& s : sequences) tokens.insert(s.tokens.begin(), s.tokens.end());
  trie.vocab_ = Vocabulary(std::vector<std::string>(tokens.begin(), tokens.end()));
  trie.nodes_.emplace_back();

  std::unordered_set<std::string> ids;
  for (const auto& s : sequences) {
    if (s.tokens.empty() || s.tokens.back() != kEos) {
      throw Error(ErrorCode::kInvalidArgument, "identifier of " + s.target_id + " must end with EOS");
    }
    if (std::find(s.tokens.begin(), s.tokens.end() - 1, kEos) != s.tokens.end() - 1) {
      throw Error(ErrorCode::kInvalidArgument, "identifier of " + s.target_id + " has EOS before its end");
    }
    if (!ids.insert(s.target_id).second) throw Error(ErrorCode::kDuplicateId, s.target_id);
    NodeId node = root();
    for (const auto& token : s.tokens) {
      const TokenId id = trie.vocab_.id(token);
      auto& kids = trie.nodes_[node].children;
      auto it = std::lower_bound(kids.begin(), kids.end(), id,
                                 [](const auto& edge, TokenId t) { return edge.first < t; });
      if (it != kids.end() && it->first == id) {
        node = it->second;
      } else {
        const auto next = static_cast<NodeId>(trie.nodes_.size());
        kids.insert(it, {id, next});
        trie.nodes_.emplace_back();  // invalidates `kids`
        node = next;
      }
    }
    auto& owners = trie.nodes_[node].targets;
    owners.insert(std::lower_bound(owners.begin(), owners.end(), s.target_id), s.target_id);
    trie.max_depth_ = std::max(trie.max_depth_, s.tokens.size());
  }
  trie.target_count_ = ids.size();
  return trie;
}

IdTrie IdTrie::build(const SidTable& table) {
  std::vector<OwnedSequence> sequences;
  sequences.reserve(table.entries.size());
  for (const auto& e : table.entries) sequences.push_back({e.target_id, e.sid.tokens()});
  return build(sequences);
}

std::optional<IdTrie::NodeId> IdTrie::child(NodeId node, TokenId token) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), token,
                             [](const auto& edge, TokenId t) { return edge.first < t; });
  if (it == kids.end() || it->first != token) return std::nullopt;
  return it->second;
}

std::optional<IdTrie::NodeId> IdTrie::walk(std::span<const std::string> tokens) const {
  NodeId node = root();
  for (const auto& token : tokens) {
    const auto id = vocab_.find(token);
    if (!id) return std::nullopt;
    const auto next = child(node, *id);
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

std::vector<std::string> IdTrie::valid_next(std::span<const std::string> prefix) const {
  const auto node = walk(prefix);
  if (!node) throw Error(ErrorCode::kInvalidPrefix, "prefix of length " + std::to_string(prefix.size()));
  std::vector<std::string> out;
  for (const auto& [token, next] : nodes_[*node].children) out.push_back(vocab_.token(token));
  return out;
}

std::vector<std::string> IdTrie::lookup(std::span<const std::string> tokens) const {
  const auto node = walk(tokens);
  if (!node) return {};
  return nodes_[*node].targets;
}

}  // namespace gencmr
