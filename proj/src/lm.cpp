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

#include "gencmr/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "gencmr/corpus.hpp"
#include "gencmr/error.hpp"
#include "gencmr/text.hpp"

namespace gencmr {

Eigen::VectorXd CondTokenModel::next_token_logprobs(std::string_view query,
                                                    std::span<const TokenId> prefix) const {
  const TokenSeq seq(prefix.begin(), prefix.end());
  return score(query, std::span<const TokenSeq>(&seq, 1)).row(0).transpose();
}

Eigen::MatrixXd UniformModel::score(std::string_view, std::span<const TokenSeq> prefixes) const {
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(prefixes.size()), v,
                                   -std::log(static_cast<double>(v)));
}

ExternalScorerModel::ExternalScorerModel(Vocabulary vocab, BatchScorer scorer, double tolerance)
    : vocab_(std::move(vocab)), scorer_(std::move(scorer)), tolerance_(tolerance) {
  if (!scorer_) throw Error(ErrorCode::kInvalidArgument, "external scorer is empty");
}

Eigen::MatrixXd ExternalScorerModel::score(std::string_view query,
                                           std::span<const TokenSeq> prefixes) const {
  Eigen::MatrixXd rows = scorer_(query, prefixes);
  if (rows.rows() != static_cast<Eigen::Index>(prefixes.size()) ||
      rows.cols() != static_cast<Eigen::Index>(vocab_.size())) {
    throw Error(ErrorCode::kShapeMismatch, "external scorer returned wrong shape");
  }
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double mass = rows.row(r).array().exp().sum();
    if (!std::isfinite(mass) || std::abs(mass - 1.0) > tolerance_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "external scorer row " + std::to_string(r) + " sums to " + std::to_string(mass));
    }
  }
  return rows;
}

std::string MemorizingModel::context_key(std::uint32_t key, std::span<const TokenId> prefix) {
  std::string out(sizeof(std::uint32_t) * (prefix.size() + 1), '\0');
  std::memcpy(out.data(), &key, sizeof(key));
  if (!prefix.empty()) {
    std::memcpy(out.data() + sizeof(key), prefix.data(), prefix.size() * sizeof(TokenId));
  }
  return out;
}

void MemorizingModel::index_keys() {
  key_index_.clear();
  for (std::size_t i = 0; i < keys_.size(); ++i) key_index_.emplace(keys_[i], i);
  key_embeddings_.resize(static_cast<Eigen::Index>(keys_.size()), provider_->dim());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    key_embeddings_.row(static_cast<Eigen::Index>(i)) = provider_->embed(keys_[i]).transpose();
  }
}

MemorizingModel MemorizingModel::train(std::span<const TrainingPair> pairs, double epsilon,
                                       std::shared_ptr<const EmbeddingProvider> provider,
                                       std::span<const std::string> extra_vocabulary) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyTraining, "no training pairs");
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing epsilon must be positive");
  }
  if (!provider) throw Error(ErrorCode::kInvalidArgument, "embedding provider required");

  MemorizingModel model;
  model.epsilon_ = epsilon;
  model.provider_ = std::move(provider);

  std::set<std::string> tokens(extra_vocabulary.begin(), extra_vocabulary.end());
  std::set<std::string> keys;
  std::vector<std::string> normalized;
  normalized.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.tokens.empty() || p.tokens.back() != kEos) {
      throw Error(ErrorCode::kInvalidArgument, "training sequence for '" + p.query + "' must end with EOS");
    }
    tokens.insert(p.tokens.begin(), p.tokens.end());
    normalized.push_back(nfc_normalize(p.query));
    keys.insert(normalized.back());
  }
  model.vocab_ = Vocabulary(std::vector<std::string>(tokens.begin(), tokens.end()));
  model.keys_.assign(keys.begin(), keys.end());
  model.index_keys();

  std::unordered_map<std::string, std::map<TokenId, std::uint32_t>> raw;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto key = static_cast<std::uint32_t>(model.key_index_.at(normalized[i]));
    const TokenSeq seq = model.vocab_.encode(pairs[i].tokens);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      ++raw[context_key(key, std::span(seq).first(t))][seq[t]];
    }
  }
  model.table_.reserve(raw.size());
  for (auto& [ctx, next] : raw) {
    Counts c;
    for (const auto& [token, n] : next) {
      c.next.emplace_back(token, n);
      c.total += n;
    }
    model.table_.emplace(ctx, std::move(c));
  }
  return model;
}

std::optional<std::size_t> MemorizingModel::exact_key(std::string_view query) const {
  const auto it = key_index_.find(nfc_normalize(query));
  if (it == key_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> MemorizingModel::nearest_key(std::string_view query,
                                                        std::optional<std::size_t> exclude) const {
  const Eigen::VectorXd q = provider_->embed(nfc_normalize(query));
  if (q.norm() == 0) return std::nullopt;
  std::optional<std::size_t> best;
  double best_sim = 0;
  for (Eigen::Index i = 0; i < key_embeddings_.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (exclude && *exclude == idx) continue;
    // Rows are unit or zero, q is unit: the dot product is the cosine.
    const double sim = key_embeddings_.row(i).dot(q);
    if (!best || sim > best_sim) {
      best = idx;
      best_sim = sim;
    }
  }
  return best;
}

const MemorizingModel::Counts* MemorizingModel::find(std::size_t key,
                                                     std::span<const TokenId> prefix) const {
  const auto it = table_.find(context_key(static_cast<std::uint32_t>(key), prefix));
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<std::pair<TokenId, std::uint32_t>> MemorizingModel::counts(
    std::size_t key, std::span<const TokenId> prefix) const {
  const Counts* c = find(key, prefix);
  return c ? c->next : std::vector<std::pair<TokenId, std::uint32_t>>{};
}

Eigen::MatrixXd MemorizingModel::score(std::string_view query,
                                       std::span<const TokenSeq> prefixes) const {
  const auto v = static_cast<Eigen::Index>(vocab_.size());
  const double uniform = -std::log(static_cast<double>(v));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(prefixes.size()), v);

  const auto exact = exact_key(query);
  bool backoff_resolved = false;
  std::optional<std::size_t> backoff;
  auto backoff_key = [&]() {
    if (!backoff_resolved) {
      backoff = nearest_key(query, exact);
      backoff_resolved = true;
    }
    return backoff;
  };

  for (std::size_t r = 0; r < prefixes.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const Counts* c = exact ? find(*exact, prefixes[r]) : nullptr;
    if (c == nullptr) {
      if (const auto b = backoff_key()) c = find(*b, prefixes[r]);
    }
    if (c == nullptr) {
      out.row(row).setConstant(uniform);
      continue;
    }
    const double log_denominator = std::log(static_cast<double>(c->total) + epsilon_ * static_cast<double>(v));
    out.row(row).setConstant(std::log(epsilon_) - log_denominator);
    for (const auto& [token, n] : c->next) {
      out(row, static_cast<Eigen::Index>(token)) = std::log(static_cast<double>(n) + epsilon_) - log_denominator;
    }
  }
  return out;
}

namespace {

constexpr std::string_view kModelMagic = "GCMRMDL1";
constexpr std::uint32_t kModelVersion = 1;

class Writer {
 public:
  template <typename T>
  void pod(T value) {
    buf_.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void str(std::string_view s) {
    pod<std::uint64_t>(s.size());
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw Error(ErrorCode::kCorruptFile, source_ + ": truncated model file");
  }
  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void MemorizingModel::save(const std::filesystem::path& path, std::string_view config_hash) const {
  Writer w;
  w.raw(kModelMagic);
  w.pod(kModelVersion);
  w.str(config_hash);
  w.str(provider_->name());
  w.pod(epsilon_);
  w.pod<std::uint64_t>(vocab_.size());
  for (const auto& t : vocab_.tokens()) w.str(t);
  w.pod<std::uint64_t>(keys_.size());
  for (const auto& k : keys_) w.str(k);

  std::vector<const std::pair<const std::string, Counts>*> contexts;
  contexts.reserve(table_.size());
  for (const auto& entry : table_) contexts.push_back(&entry);
  std::sort(contexts.begin(), contexts.end(), [](const auto* a, const auto* b) {
    const std::size_t na = a->first.size() / sizeof(TokenId);
    const std::size_t nb = b->first.size() / sizeof(TokenId);
    std::vector<std::uint32_t> va(na), vb(nb);
    std::memcpy(va.data(), a->first.data(), a->first.size());
    std::memcpy(vb.data(), b->first.data(), b->first.size());
    return va < vb;
  });
  w.pod<std::uint64_t>(contexts.size());
  for (const auto* entry : contexts) {
    w.str(entry->first);
    w.pod<std::uint64_t>(entry->second.next.size());
    for (const auto& [token, n] : entry->second.next) {
      w.pod(token);
      w.pod(n);
    }
  }
  atomic_write(path, w.bytes());
}

MemorizingModel MemorizingModel::load(const std::filesystem::path& path,
                                      std::optional<std::string_view> expected_hash,
                                      std::string* stored_hash) {
  const std::string bytes = read_file(path);
  Reader r(bytes, path.string());
  if (r.raw(kModelMagic.size()) != kModelMagic) throw Error(ErrorCode::kCorruptFile, path.string() + ": bad magic");
  if (const auto version = r.pod<std::uint32_t>(); version != kModelVersion) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::string hash = r.str();
  if (stored_hash) *stored_hash = hash;
  if (expected_hash && *expected_hash != hash) {
    throw Error(ErrorCode::kConfigMismatch, path.string() + ": model built for config " + hash +
                                                ", expected " + std::string(*expected_hash));
  }
  MemorizingModel model;
  model.provider_ = make_provider(r.str());
  model.epsilon_ = r.pod<double>();
  if (!(model.epsilon_ > 0)) throw Error(ErrorCode::kCorruptFile, path.string() + ": bad epsilon");
  std::vector<std::string> tokens(r.pod<std::uint64_t>());
  for (auto& t : tokens) t = r.str();
  model.vocab_ = Vocabulary(tokens);
  if (model.vocab_.tokens() != tokens) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": vocabulary not sorted or not unique");
  }
  model.keys_.resize(r.pod<std::uint64_t>());
  for (auto& k : model.keys_) k = r.str();
  model.index_keys();
  const auto n_contexts = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_contexts; ++i) {
    std::string ctx = r.str();
    if (ctx.size() < sizeof(std::uint32_t) || ctx.size() % sizeof(std::uint32_t) != 0) {
      throw Error(ErrorCode::kCorruptFile, path.string() + ": bad context key");
    }
    Counts c;
    c.next.resize(r.pod<std::uint64_t>());
    for (auto& [token, n] : c.next) {
      token = r.pod<TokenId>();
      n = r.pod<std::uint32_t>();
      if (token >= model.vocab_.size()) throw Error(ErrorCode::kCorruptFile, path.string() + ": token id out of range");
      c.total += n;
    }
    model.table_.emplace(std::move(ctx), std::move(c));
  }
  if (!r.done()) throw Error(ErrorCode::kCorruptFile, path.string() + ": trailing bytes");
  return model;
}

double nll(const CondTokenModel& model, std::span<const TrainingPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "nll over no pairs");
  const Vocabulary& vocab = model.vocabulary();
  double total = 0;
  for (const auto& p : pairs) {
    const TokenSeq seq = vocab.encode(p.tokens);
    std::vector<TokenSeq> prefixes;
    prefixes.reserve(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) prefixes.emplace_back(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(t));
    const Eigen::MatrixXd rows = model.score(p.query, prefixes);
    double sum = 0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      sum += rows(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(seq[t]));
    }
    total += -sum;
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace gencmr
