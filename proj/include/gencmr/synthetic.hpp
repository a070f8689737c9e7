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

#ifndef GENCMR_SYNTHETIC_HPP_
#define GENCMR_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gencmr/corpus.hpp"
#include "gencmr/embed.hpp"
#include "gencmr/sid.hpp"

namespace gencmr {

struct SyntheticSuite {
  Corpus corpus;
  std::vector<Query> train_queries;
  std::vector<Query> eval_queries;
};

/// `n` targets with distinct template captions; one training query per
/// target whose text is the caption, evaluated on the same queries.
SyntheticSuite make_memorization_suite(std::size_t n, std::uint64_t seed);

// `n_unique` ordinary targets plus `n_pairs` pairs whose captions differ
// only in a counting word. Counting words are function words, so both
// members of a pair receive the same identifier. Each pair is trained
// under one shared query (the caption without the counting word); every
// target is evaluated on its own full caption. Pairs are re-drawn until
// identifier construction under `params` yields exactly the designed
// collision groups; throws kInvalidArgument if that does not happen.
SyntheticSuite make_collision_suite(std::size_t n_unique, std::size_t n_pairs, const SidParams& params,
                                    const EmbeddingProvider& provider, std::uint64_t seed);

}  // namespace gencmr

#endif  // GENCMR_SYNTHETIC_HPP_
