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

#include "gencmr/decode.hpp"

#include <algorithm>
#include <cmath>

#include "gencmr/error.hpp"

namespace gencmr {

namespace {

struct Hypothesis {
  TokenSeq ids;  // model vocabulary ids
  IdTrie::NodeId node = IdTrie::root();
  double logprob = 0;
  bool finished = false;
};

// Expansion of a live hypothesis, materialized only if selected.
struct Expansion {
  std::size_t parent;
  TokenId token;
  IdTrie::NodeId node;
  double logprob;
};

bool better(double la, std::span<const TokenId> a, double lb, std::span<const TokenId> b) {
  if (la != lb) return la > lb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Pool entry: either a frozen hypothesis or an expansion of a live one.
struct PoolItem {
  double logprob;
  std::size_t index;
  bool frozen;
};

template <typename Expand>
std::vector<Hypothesis> run_beam(const CondTokenModel& model, std::string_view query, int beam,
                                 std::size_t max_steps, Expand&& expand, TokenId eos,
                                 bool keep_unfinished) {
  if (beam < 1) throw Error(ErrorCode::kInvalidArgument, "beam width must be >= 1");
  const auto width = static_cast<std::size_t>(beam);
  std::vector<Hypothesis> finished;
  std::vector<Hypothesis> live(1);

  for (std::size_t step = 0; step < max_steps && !live.empty(); ++step) {
    std::vector<TokenSeq> prefixes;
    prefixes.reserve(live.size());
    for (const auto& h : live) prefixes.push_back(h.ids);
    const Eigen::MatrixXd rows = model.score(query, prefixes);

    std::vector<Expansion> expansions;
    for (std::size_t b = 0; b < live.size(); ++b) {
      expand(live[b], [&](TokenId token, IdTrie::NodeId node) {
        expansions.push_back({b, token, node,
                              live[b].logprob + rows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(token))});
      });
    }

    // Candidate token sequences are compared without materializing them.
    std::vector<TokenSeq> scratch(expansions.size());
    std::vector<PoolItem> pool;
    pool.reserve(finished.size() + expansions.size());
    for (std::size_t i = 0; i < finished.size(); ++i) pool.push_back({finished[i].logprob, i, true});
    for (std::size_t i = 0; i < expansions.size(); ++i) pool.push_back({expansions[i].logprob, i, false});

    auto sequence_of = [&](const PoolItem& item) -> const TokenSeq& {
      if (item.frozen) return finished[item.index].ids;
      TokenSeq& s = scratch[item.index];
      if (s.empty()) {
        const auto& e = expansions[item.index];
        s = live[e.parent].ids;
        s.push_back(e.token);
      }
      return s;
    };
    auto cmp = [&](const PoolItem& a, const PoolItem& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      return better(0, sequence_of(a), 0, sequence_of(b));
    };
    const std::size_t keep = std::min(width, pool.size());
    if (keep < pool.size()) {
      std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), cmp);
      pool.resize(keep);
    }
    std::sort(pool.begin(), pool.end(), cmp);

    std::vector<Hypothesis> next_finished;
    std::vector<Hypothesis> next_live;
    for (const auto& item : pool) {
      if (item.frozen) {
        next_finished.push_back(std::move(finished[item.index]));
        continue;
      }
      const auto& e = expansions[item.index];
      Hypothesis h;
      h.ids = sequence_of(item);
      h.node = e.node;
      h.logprob = e.logprob;
      h.finished = e.token == eos;
      (h.finished ? next_finished : next_live).push_back(std::move(h));
    }
    finished = std::move(next_finished);
    live = std::move(next_live);
  }

  if (keep_unfinished) {
    for (auto& h : live) finished.push_back(std::move(h));
  }
  std::sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return better(a.logprob, a.ids, b.logprob, b.ids);
  });
  if (finished.size() > width) finished.resize(width);
  return finished;
}

std::vector<ScoredSequence> to_scored(const Vocabulary& vocab, std::vector<Hypothesis> hyps) {
  std::vector<ScoredSequence> out;
  out.reserve(hyps.size());
  for (auto& h : hyps) out.push_back({vocab.decode(h.ids), h.logprob, h.finished});
  return out;
}

}  // namespace

std::vector<ScoredSequence> constrained_beam_search(const CondTokenModel& model, const IdTrie& trie,
                                                    std::string_view query, int beam) {
  if (trie.empty()) throw Error(ErrorCode::kEmptyTrie, "no identifiers to decode");
  const Vocabulary& mv = model.vocabulary();
  const Vocabulary& tv = trie.vocabulary();
  // Both vocabularies are sorted, so this map preserves token order.
  std::vector<TokenId> to_model(tv.size());
  for (TokenId t = 0; t < tv.size(); ++t) {
    const auto id = mv.find(tv.token(t));
    if (!id) throw Error(ErrorCode::kInvalidArgument, "identifier token '" + tv.token(t) + "' unknown to the model");
    to_model[t] = *id;
  }

  auto expand = [&](const Hypothesis& h, auto&& emit) {
    for (const auto& [token, child] : trie.children(h.node)) emit(to_model[token], child);
  };
  auto hyps = run_beam(model, query, beam, trie.max_depth(), expand, mv.eos(), false);
  return to_scored(mv, std::move(hyps));
}

std::vector<ScoredSequence> unconstrained_beam_search(const CondTokenModel& model,
                                                      std::string_view query, int beam,
                                                      std::size_t max_length) {
  if (max_length < 1) throw Error(ErrorCode::kInvalidArgument, "max_length must be >= 1");
  const Vocabulary& mv = model.vocabulary();
  auto expand = [&](const Hypothesis&, auto&& emit) {
    for (TokenId t = 0; t < mv.size(); ++t) emit(t, IdTrie::root());
  };
  auto hyps = run_beam(model, query, beam, max_length, expand, mv.eos(), true);
  return to_scored(mv, std::move(hyps));
}

double log_relevance(const CondTokenModel& model, std::string_view query,
                     std::span<const std::string> tokens) {
  const Vocabulary& vocab = model.vocabulary();
  const TokenSeq seq = vocab.encode(tokens);
  std::vector<TokenSeq> prefixes;
  prefixes.reserve(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    prefixes.emplace_back(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(t));
  }
  const Eigen::MatrixXd rows = model.score(query, prefixes);
  double sum = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    sum += rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(seq[t]));
  }
  return sum;
}

double relevance(const CondTokenModel& model, std::string_view query,
                 std::span<const std::string> tokens) {
  return std::exp(log_relevance(model, query, tokens));
}

RankedResult expand_to_targets(const IdTrie& trie, std::span<const ScoredSequence> sequences) {
  RankedResult out;
  for (const auto& s : sequences) {
    if (!s.finished) continue;
    for (const auto& id : trie.lookup(s.tokens)) out.entries.push_back({id, s.logprob, s.tokens});
  }
  return out;
}

std::vector<std::vector<std::string>> enumerate_sequences(const IdTrie& trie) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> path;
  auto visit = [&](auto&& self, IdTrie::NodeId node) -> void {
    if (!trie.targets(node).empty()) out.push_back(path);
    for (const auto& [token, child] : trie.children(node)) {
      path.push_back(trie.vocabulary().token(token));
      self(self, child);
      path.pop_back();
    }
  };
  visit(visit, IdTrie::root());
  return out;
}

RankedResult brute_force_rank(const CondTokenModel& model, const IdTrie& trie, std::string_view query) {
  if (trie.empty()) throw Error(ErrorCode::kEmptyTrie, "no identifiers to rank");
  if (trie.target_count() > kBruteForceLimit) {
    throw Error(ErrorCode::kTooLarge, std::to_string(trie.target_count()) + " targets");
  }
  std::vector<ScoredSequence> scored;
  for (auto& seq : enumerate_sequences(trie)) {
    const double lp = log_relevance(model, query, seq);
    scored.push_back({std::move(seq), lp, true});
  }
  const Vocabulary& mv = model.vocabulary();
  std::vector<TokenSeq> ids;
  for (const auto& s : scored) ids.push_back(mv.encode(s.tokens));
  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return better(scored[a].logprob, ids[a], scored[b].logprob, ids[b]);
  });
  std::vector<ScoredSequence> sorted;
  sorted.reserve(order.size());
  for (const std::size_t i : order) sorted.push_back(std::move(scored[i]));
  return expand_to_targets(trie, sorted);
}

}  // namespace gencmr
