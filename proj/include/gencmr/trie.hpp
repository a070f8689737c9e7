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

#ifndef GENCMR_TRIE_HPP_
#define GENCMR_TRIE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gencmr/sid.hpp"
#include "gencmr/vocab.hpp"

namespace gencmr {

/// Identifier token sequence (EOS-terminated) owned by one target.
struct OwnedSequence {
  std::string target_id;
  std::vector<std::string> tokens;
};

// Prefix trie over identifier token sequences. The node reached by a full
// sequence (EOS included) stores every target owning that sequence, so
// identifier collisions share one terminal. Immutable after build.
class IdTrie {
 public:
  using NodeId = std::uint32_t;

  static IdTrie build(std::span<const OwnedSequence> sequences);
  static IdTrie build(const SidTable& table);

  const Vocabulary& vocabulary() const { return vocab_; }
  bool empty() const { return target_count_ == 0; }
  std::size_t target_count() const { return target_count_; }
  std::size_t node_count() const { return nodes_.size(); }
  /// Longest root-to-terminal path, in tokens.
  std::size_t max_depth() const { return max_depth_; }

  static constexpr NodeId root() { return 0; }
  std::span<const std::pair<TokenId, NodeId>> children(NodeId node) const {
    return nodes_[node].children;
  }
  std::optional<NodeId> child(NodeId node, TokenId token) const;
  /// Targets whose identifier ends at `node`, sorted by target_id.
  const std::vector<std::string>& targets(NodeId node) const { return nodes_[node].targets; }

  std::optional<NodeId> walk(std::span<const std::string> tokens) const;

  /// Tokens that extend `prefix` to a longer valid path, in token order.
  /// Throws kInvalidPrefix when `prefix` is not a path of the trie.
  std::vector<std::string> valid_next(std::span<const std::string> prefix) const;

  /// Owners of the exact sequence, or empty when it is not an identifier.
  std::vector<std::string> lookup(std::span<const std::string> tokens) const;

 private:
  struct Node {
    std::vector<std::pair<TokenId, NodeId>> children;  // sorted by token
    std::vector<std::string> targets;
  };

  Vocabulary vocab_;
  std::vector<Node> nodes_;
  std::size_t target_count_ = 0;
  std::size_t max_depth_ = 0;
};

}  // namespace gencmr

#endif  // GENCMR_TRIE_HPP_
