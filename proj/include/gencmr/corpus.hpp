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

#ifndef GENCMR_CORPUS_HPP_
#define GENCMR_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gencmr {

/// Retrieval direction: text queries against image targets, or image
/// queries against sentence targets. Images enter as caption descriptors.
enum class Direction { kToImage, kToText };

std::string_view direction_name(Direction d);
Direction parse_direction(std::string_view name);

struct Target {
  std::string target_id;
  std::string descriptor;
  Direction direction = Direction::kToImage;

  bool operator==(const Target&) const = default;
};

struct Query {
  std::string query_id;
  std::string text;
  std::vector<std::string> gt_targets;  // sorted, unique

  bool operator==(const Query&) const = default;
};

// Ordered, immutable target collection. Row i of any embedding matrix built
// from a corpus refers to targets()[i].
class Corpus {
 public:
  Corpus() = default;
  /// Validates every invariant; throws gencmr::Error on the first violation.
  explicit Corpus(std::vector<Target> targets);

  const std::vector<Target>& targets() const { return targets_; }
  std::size_t size() const { return targets_.size(); }
  Direction direction() const { return direction_; }
  std::optional<std::size_t> index_of(std::string_view target_id) const;
  const Target& at(std::string_view target_id) const;
  std::vector<std::string> descriptors() const;

  bool operator==(const Corpus& other) const { return targets_ == other.targets_; }

 private:
  std::vector<Target> targets_;
  Direction direction_ = Direction::kToImage;
  std::unordered_map<std::string, std::size_t> index_;
};

Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

std::vector<Query> parse_queries(std::istream& in, const Corpus& corpus);
std::vector<Query> load_queries(const std::filesystem::path& path, const Corpus& corpus);
void write_queries(std::ostream& out, const std::vector<Query>& queries);
void save_queries(const std::filesystem::path& path, const std::vector<Query>& queries);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace gencmr

#endif  // GENCMR_CORPUS_HPP_
