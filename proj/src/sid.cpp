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

#include "gencmr/sid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gencmr/error.hpp"
#include "gencmr/text.hpp"
#include "gencmr/vocab.hpp"

namespace gencmr {

using nlohmann::json;

ClusterKeywords cluster_tfidf(std::span<const std::vector<std::string>> cluster_documents,
                              int banned_size, const TfidfOptions& options) {
  if (banned_size < 0) throw Error(ErrorCode::kInvalidArgument, "banned set size must be >= 0");
  const std::size_t k = cluster_documents.size();
  ClusterKeywords out;
  out.ranked.resize(k);
  out.banned.resize(k);
  if (k == 0) return out;

  std::vector<std::map<std::string, std::size_t>> tf(k);
  std::unordered_map<std::string, std::size_t> cluster_freq;
  std::size_t total_words = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (const auto& word : cluster_documents[c]) ++tf[c][word];
    total_words += cluster_documents[c].size();
    for (const auto& [word, count] : tf[c]) ++cluster_freq[word];
  }
  out.average_words = static_cast<double>(total_words) / static_cast<double>(k);

  for (std::size_t c = 0; c < k; ++c) {
    auto& ranked = out.ranked[c];
    for (const auto& [word, count] : tf[c]) {
      if (!options.rank_stopwords && is_stopword(word)) continue;
      const double f = static_cast<double>(cluster_freq.at(word));
      ranked.push_back({word, static_cast<double>(count) * std::log(1.0 + out.average_words / f)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const WeightedWord& a, const WeightedWord& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.word < b.word;
    });
    const std::size_t top = std::min(ranked.size(), static_cast<std::size_t>(banned_size));
    for (std::size_t i = 0; i < top; ++i) out.banned[c].push_back(ranked[i].word);
  }
  return out;
}

ClusterKeywords cluster_tfidf(const Corpus& corpus, std::span<const int> labels, int k,
                              int banned_size, const TfidfOptions& options) {
  if (labels.size() != corpus.size()) {
    throw Error(ErrorCode::kShapeMismatch, "labels do not cover the corpus");
  }
  std::vector<std::vector<std::string>> docs(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= k) throw Error(ErrorCode::kInvalidArgument, "label out of range");
    auto words = tokenize(corpus.targets()[i].descriptor);
    auto& doc = docs[static_cast<std::size_t>(c)];
    doc.insert(doc.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
  }
  return cluster_tfidf(docs, banned_size, options);
}

std::vector<std::string> assign_global_tokens(const ClusterKeywords& keywords) {
  std::unordered_set<std::string> taken;
  std::vector<std::string> out;
  out.reserve(keywords.ranked.size());
  for (std::size_t c = 0; c < keywords.ranked.size(); ++c) {
    std::string token;
    for (const auto& w : keywords.ranked[c]) {
      if (!taken.contains(w.word)) {
        token = w.word;
        break;
      }
    }
    if (token.empty()) {
      token = "c" + std::to_string(c);
      for (int n = 1; taken.contains(token); ++n) token = "c" + std::to_string(c) + "x" + std::to_string(n);
    }
    taken.insert(token);
    out.push_back(std::move(token));
  }
  return out;
}

std::string global_id_token(int cluster_index, const ClusterKeywords& keywords) {
  if (cluster_index < 0 || static_cast<std::size_t>(cluster_index) >= keywords.ranked.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cluster index out of range");
  }
  return assign_global_tokens(keywords)[static_cast<std::size_t>(cluster_index)];
}

namespace {

double safe_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.norm() == 0 || b.norm() == 0) return 0;
  return cosine(a, b);
}

}  // namespace

std::vector<LexicalCandidate> rank_lexical_candidates(std::string_view descriptor,
                                                      const EmbeddingProvider& provider,
                                                      const std::set<std::string>& banned,
                                                      int ngram_max) {
  const auto words = tokenize(descriptor);
  const Eigen::VectorXd doc = provider.embed(descriptor);
  std::vector<LexicalCandidate> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (int n = 1; n <= ngram_max && i + static_cast<std::size_t>(n) <= words.size(); ++n) {
      const std::string& last = words[i + static_cast<std::size_t>(n) - 1];
      // Longer n-grams from i contain this word too.
      if (is_stopword(last) || banned.contains(last)) break;
      LexicalCandidate cand;
      cand.words.assign(words.begin() + static_cast<std::ptrdiff_t>(i),
                        words.begin() + static_cast<std::ptrdiff_t>(i) + n);
      cand.phrase = join(cand.words, " ");
      if (!seen.insert(cand.phrase).second) continue;
      cand.similarity = safe_cosine(provider.embed(cand.phrase), doc);
      out.push_back(std::move(cand));
    }
  }
  std::sort(out.begin(), out.end(), [](const LexicalCandidate& a, const LexicalCandidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.phrase < b.phrase;
  });
  return out;
}

std::vector<std::string> extract_lexical_id(std::string_view descriptor,
                                            const EmbeddingProvider& provider,
                                            const std::set<std::string>& banned, int ngram_max,
                                            int m) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "lexical length m must be >= 1");
  if (ngram_max < 1) throw Error(ErrorCode::kInvalidArgument, "ngram_max must be >= 1");
  std::vector<std::string> out;
  std::unordered_set<std::string> chosen;
  for (const auto& cand : rank_lexical_candidates(descriptor, provider, banned, ngram_max)) {
    if (out.size() == static_cast<std::size_t>(m)) break;
    std::unordered_set<std::string> distinct(cand.words.begin(), cand.words.end());
    if (distinct.size() != cand.words.size()) continue;
    const bool repeats = std::any_of(cand.words.begin(), cand.words.end(),
                                     [&](const std::string& w) { return chosen.contains(w); });
    if (repeats) continue;
    for (const auto& w : cand.words) {
      if (out.size() == static_cast<std::size_t>(m)) break;
      out.push_back(w);
      chosen.insert(w);
    }
  }
  while (out.size() < static_cast<std::size_t>(m)) out.emplace_back(kPadToken);
  return out;
}

std::vector<std::string> StructuredIdentifier::tokens() const {
  std::vector<std::string> out;
  out.reserve(lexical.size() + 3);
  if (!global.empty()) out.push_back(global);
  out.insert(out.end(), lexical.begin(), lexical.end());
  if (!suffix.empty()) out.push_back(suffix);
  out.emplace_back(kEos);
  return out;
}

std::optional<std::size_t> SidTable::index_of(std::string_view target_id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].target_id == target_id) return i;
  }
  return std::nullopt;
}

const SidEntry& SidTable::at(std::string_view target_id) const {
  if (auto i = index_of(target_id)) return entries[*i];
  throw Error(ErrorCode::kUnknownTarget, std::string(target_id));
}

std::vector<std::string> SidTable::token_inventory() const {
  std::set<std::string> all;
  for (const auto& e : entries) {
    for (auto& t : e.sid.tokens()) all.insert(std::move(t));
  }
  return {all.begin(), all.end()};
}

std::vector<CollisionGroup> find_collisions(std::span<const SidEntry> entries) {
  std::map<std::vector<std::string>, std::size_t> first_seen;
  std::vector<CollisionGroup> groups;
  std::vector<std::vector<std::string>> members;
  std::vector<std::vector<std::string>> sequences;
  for (const auto& e : entries) {
    auto tokens = e.sid.tokens();
    const auto [it, inserted] = first_seen.emplace(tokens, members.size());
    if (inserted) {
      members.push_back({e.target_id});
      sequences.push_back(std::move(tokens));
    } else {
      members[it->second].push_back(e.target_id);
    }
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].size() >= 2) groups.push_back({sequences[i], members[i]});
  }
  return groups;
}

namespace {

void index_collisions(SidTable& table) {
  table.collisions = find_collisions(table.entries);
  std::unordered_map<std::string, int> group_of;
  for (std::size_t g = 0; g < table.collisions.size(); ++g) {
    for (const auto& id : table.collisions[g].members) group_of[id] = static_cast<int>(g);
  }
  for (auto& e : table.entries) {
    const auto it = group_of.find(e.target_id);
    e.collision_group = it == group_of.end() ? -1 : it->second;
  }
}

}  // namespace

SidTable assemble_sids(const Corpus& corpus, std::span<const int> labels,
                       const ClusterKeywords& keywords, const EmbeddingProvider& provider,
                       const SidParams& params, const SidOptions& options) {
  if (labels.size() != corpus.size()) {
    throw Error(ErrorCode::kShapeMismatch, "labels do not cover the corpus");
  }
  SidTable table;
  table.global_tokens = assign_global_tokens(keywords);
  table.banned = keywords.banned;
  const std::set<std::string> no_ban;
  table.entries.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Target& t = corpus.targets()[i];
    const int cluster = labels[i];
    if (cluster < 0 || static_cast<std::size_t>(cluster) >= keywords.banned.size()) {
      throw Error(ErrorCode::kInvalidArgument, "label out of range for " + t.target_id);
    }
    SidEntry entry;
    entry.target_id = t.target_id;
    entry.cluster = cluster;
    if (options.global) entry.sid.global = table.global_tokens[static_cast<std::size_t>(cluster)];
    if (options.serial_lexical) {
      entry.sid.lexical = {std::to_string(i)};
    } else {
      const auto& banned_list = keywords.banned[static_cast<std::size_t>(cluster)];
      const std::set<std::string> banned(banned_list.begin(), banned_list.end());
      entry.sid.lexical = extract_lexical_id(t.descriptor, provider, options.dedup ? banned : no_ban,
                                             params.ngram_max, params.m);
    }
    table.entries.push_back(std::move(entry));
  }
  index_collisions(table);
  if (options.suffix_collisions && !table.collisions.empty()) {
    for (const auto& group : table.collisions) {
      for (std::size_t j = 0; j < group.members.size(); ++j) {
        table.entries[*table.index_of(group.members[j])].sid.suffix = std::to_string(j + 1);
      }
    }
    index_collisions(table);
  }
  return table;
}

SidTable build_sids(const Corpus& corpus, const EmbeddingProvider& provider,
                    const SidParams& params, const SidOptions& options,
                    const EmbeddingMatrix<double>* target_embeddings) {
  EmbeddingMatrix<double> embedded;
  if (target_embeddings == nullptr) {
    embedded = embed_texts(provider, corpus.descriptors());
    target_embeddings = &embedded;
  }
  if (static_cast<std::size_t>(target_embeddings->size()) != corpus.size()) {
    throw Error(ErrorCode::kShapeMismatch, "embedding rows do not match corpus size");
  }
  const auto clusters = kmeans<double>(target_embeddings->rows, params.k, params.max_iter, params.seed);
  const auto keywords = cluster_tfidf(corpus, clusters.labels, params.k, params.banned_size);
  return assemble_sids(corpus, clusters.labels, keywords, provider, params, options);
}

namespace {

json params_json(const SidParams& p, const SidOptions& o) {
  return {{"k", p.k},
          {"m", p.m},
          {"banned_size", p.banned_size},
          {"ngram_max", p.ngram_max},
          {"max_iter", p.max_iter},
          {"seed", p.seed},
          {"global", o.global},
          {"dedup", o.dedup},
          {"serial_lexical", o.serial_lexical},
          {"suffix_collisions", o.suffix_collisions}};
}

}  // namespace

void write_sid_table(std::ostream& out, const SidTable& table, const SidFileHeader& header) {
  json clusters = json::array();
  for (std::size_t c = 0; c < table.global_tokens.size(); ++c) {
    clusters.push_back({{"global", table.global_tokens[c]}, {"banned", table.banned.at(c)}});
  }
  json head = {{"format", "gencmr.sid"},
               {"version", 1},
               {"config_hash", header.config_hash},
               {"corpus_hash", header.corpus_hash},
               {"provider", header.provider},
               {"params", params_json(header.params, header.options)},
               {"clusters", clusters}};
  out << head.dump() << '\n';
  for (const auto& e : table.entries) {
    json record = {{"target_id", e.target_id},
                   {"cluster", e.cluster},
                   {"global", e.sid.global},
                   {"lexical", e.sid.lexical},
                   {"suffix", e.sid.suffix},
                   {"collisions_group", e.collision_group < 0 ? json(nullptr) : json(e.collision_group)}};
    out << record.dump() << '\n';
  }
}

void save_sid_table(const std::filesystem::path& path, const SidTable& table,
                    const SidFileHeader& header) {
  std::ostringstream out;
  write_sid_table(out, table, header);
  atomic_write(path, out.str());
}

SidTable load_sid_table(const std::filesystem::path& path, SidFileHeader* header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open SID table " + path.string());
  SidTable table;
  std::string raw;
  std::size_t line = 0;
  try {
    if (!std::getline(in, raw)) throw Error(ErrorCode::kCorruptFile, path.string() + ": empty SID table");
    ++line;
    const json head = json::parse(raw);
    if (head.value("format", "") != "gencmr.sid" || head.value("version", 0) != 1) {
      throw Error(ErrorCode::kCorruptFile, path.string() + ": not a version-1 SID table");
    }
    if (header != nullptr) {
      const json& p = head.at("params");
      header->config_hash = head.at("config_hash").get<std::string>();
      header->corpus_hash = head.at("corpus_hash").get<std::string>();
      header->provider = head.at("provider").get<std::string>();
      header->params = {p.at("k"), p.at("m"), p.at("banned_size"), p.at("ngram_max"),
                        p.at("max_iter"), p.at("seed")};
      header->options = {p.at("global"), p.at("dedup"), p.at("serial_lexical"),
                         p.at("suffix_collisions")};
    }
    for (const auto& c : head.at("clusters")) {
      table.global_tokens.push_back(c.at("global").get<std::string>());
      table.banned.push_back(c.at("banned").get<std::vector<std::string>>());
    }
    std::vector<int> stored_groups;
    while (std::getline(in, raw)) {
      ++line;
      if (trim(raw).empty()) continue;
      const json r = json::parse(raw);
      SidEntry e;
      e.target_id = r.at("target_id").get<std::string>();
      e.cluster = r.at("cluster").get<int>();
      e.sid.global = r.at("global").get<std::string>();
      e.sid.lexical = r.at("lexical").get<std::vector<std::string>>();
      e.sid.suffix = r.at("suffix").get<std::string>();
      const auto& g = r.at("collisions_group");
      stored_groups.push_back(g.is_null() ? -1 : g.get<int>());
      table.entries.push_back(std::move(e));
    }
    index_collisions(table);
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
      if (table.entries[i].collision_group != stored_groups[i]) {
        throw Error(ErrorCode::kCorruptFile, path.string() + ": collision groups inconsistent at " +
                                                 table.entries[i].target_id);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + " line " + std::to_string(line) + ": " + e.what());
  }
  if (table.entries.empty()) throw Error(ErrorCode::kCorruptFile, path.string() + ": no entries");
  return table;
}

}  // namespace gencmr
