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

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "gencmr/error.hpp"
#include "gencmr/lm.hpp"
#include "gencmr/synthetic.hpp"
#include "helpers.hpp"

using namespace gencmr;

namespace {

using Tokens = std::vector<std::string>;
const std::string kE(kEos);

std::shared_ptr<const EmbeddingProvider> hashing() { return std::make_shared<HashingEmbedder>(); }

Eigen::VectorXd row(const CondTokenModel& m, std::string_view q, const Tokens& prefix) {
  return m.next_token_logprobs(q, m.vocabulary().encode(prefix));
}

double prob(const CondTokenModel& m, std::string_view q, const Tokens& prefix, const std::string& token) {
  return std::exp(row(m, q, prefix)[m.vocabulary().id(token)]);
}

}  // namespace

TEST_CASE("one pair puts the mass on the observed token") {
  const std::vector<TrainingPair> pairs{{"q", {"a", kE}}};
  const auto m = MemorizingModel::train(pairs, 0.01, hashing());
  const auto r = row(m, "q", {});
  Eigen::Index best = 0;
  r.maxCoeff(&best);
  CHECK(m.vocabulary().token(static_cast<TokenId>(best)) == "a");
}

TEST_CASE("two sequences under one query split the mass") {
  const std::vector<TrainingPair> pairs{{"q", {"a", kE}}, {"q", {"b", kE}}};
  const auto m = MemorizingModel::train(pairs, 1e-12, hashing());
  CHECK(prob(m, "q", {}, "a") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(prob(m, "q", {}, "b") == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("recount oracle on random pairs") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 10; ++round) {
    std::vector<TrainingPair> pairs;
    for (int i = 0; i < 20; ++i) {
      TrainingPair p{"query " + std::to_string(rng() % 6), {}};
      const std::size_t len = 1 + rng() % 4;
      for (std::size_t t = 0; t < len; ++t) p.tokens.push_back("w" + std::to_string(rng() % 5));
      p.tokens.push_back(kE);
      pairs.push_back(p);
    }
    const double eps = 0.01;
    const auto m = MemorizingModel::train(pairs, eps, hashing());
    std::map<std::pair<std::string, Tokens>, std::map<std::string, int>> counts;
    for (const auto& p : pairs) {
      for (std::size_t t = 0; t < p.tokens.size(); ++t) {
        ++counts[{p.query, Tokens(p.tokens.begin(), p.tokens.begin() + static_cast<long>(t))}][p.tokens[t]];
      }
    }
    const double v = static_cast<double>(m.vocabulary().size());
    for (const auto& [ctx, next] : counts) {
      double total = 0;
      for (const auto& [tok, n] : next) total += n;
      const auto r = row(m, ctx.first, ctx.second);
      CHECK(std::abs(r.array().exp().sum() - 1.0) < 1e-9);
      for (const auto& tok : m.vocabulary().tokens()) {
        const auto it = next.find(tok);
        const double c = it == next.end() ? 0.0 : it->second;
        CHECK(testing::rel_diff(std::exp(r[m.vocabulary().id(tok)]), (c + eps) / (total + eps * v)) < 1e-12);
      }
    }
  }
}

TEST_CASE("query without tokens gets the uniform distribution") {
  const std::vector<TrainingPair> pairs{{"q one", {"a", kE}}, {"q two", {"b", kE}}};
  const auto m = MemorizingModel::train(pairs, 0.01, hashing());
  const auto r = row(m, "?!", {});
  const double u = -std::log(static_cast<double>(m.vocabulary().size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(u).epsilon(1e-15));
}

TEST_CASE("prefix never observed anywhere is uniform") {
  const std::vector<TrainingPair> pairs{{"q one", {"a", kE}}, {"q two", {"b", kE}}};
  const auto m = MemorizingModel::train(pairs, 0.01, hashing());
  const auto r = row(m, "q one", {"b", "b"});
  CHECK((r.array() == r[0]).all());
}

TEST_CASE("trained prefix: argmax is the observed continuation") {
  const std::vector<TrainingPair> pairs{{"q", {"a", "b", "c", kE}}, {"r", {"a", "c", "b", kE}}};
  const auto m = MemorizingModel::train(pairs, 0.01, hashing());
  Eigen::Index best = 0;
  row(m, "q", {"a"}).maxCoeff(&best);
  CHECK(m.vocabulary().token(static_cast<TokenId>(best)) == "b");
  row(m, "r", {"a"}).maxCoeff(&best);
  CHECK(m.vocabulary().token(static_cast<TokenId>(best)) == "c");
}

TEST_CASE("perturbed query backs off to its nearest training query") {
  const auto suite = make_memorization_suite(60, 4);
  std::vector<TrainingPair> pairs;
  for (const auto& q : suite.train_queries) pairs.push_back({q.text, {q.gt_targets[0], kE}});
  const auto provider = hashing();
  const auto m = MemorizingModel::train(pairs, 0.01, provider);
  int strict = 0;
  for (const auto& q : suite.train_queries) {
    const std::string perturbed = "the " + q.text;
    const Eigen::VectorXd e = provider->embed(perturbed);
    // Brute-force nearest key.
    std::size_t best = 0;
    double best_sim = -2, second = -2;
    for (std::size_t k = 0; k < m.keys().size(); ++k) {
      const double s = e.dot(provider->embed(m.keys()[k]));
      if (s > best_sim) {
        second = best_sim;
        best_sim = s;
        best = k;
      } else if (s > second) {
        second = s;
      }
    }
    CHECK(m.nearest_key(perturbed) == best);
    if (m.keys()[best] == q.text && best_sim > second) {
      ++strict;
      CHECK(row(m, perturbed, {}) == row(m, q.text, {}));
    }
  }
  CHECK(strict > 50);
}

TEST_CASE("nll of a uniform model") {
  Tokens vocab;
  for (int i = 0; i < 99; ++i) vocab.push_back("v" + std::to_string(i));
  const UniformModel u{Vocabulary(vocab)};
  REQUIRE(u.vocabulary().size() == 100);
  const std::vector<TrainingPair> pairs{{"anything", {"v1", "v2", "v3", "v4", "v5", kE}}};
  CHECK(testing::rel_diff(nll(u, pairs), 6 * std::log(100.0)) < 1e-12);
}

TEST_CASE("perfect memorization drives nll to zero") {
  const auto suite = make_memorization_suite(30, 6);
  std::vector<TrainingPair> pairs;
  for (const auto& q : suite.train_queries) pairs.push_back({q.text, {"g", q.gt_targets[0], kE}});
  const auto m = MemorizingModel::train(pairs, 1e-10, hashing());
  CHECK(nll(m, pairs) < 1e-6);
  CHECK(nll(m, pairs) == nll(m, pairs));
  CHECK(nll(m, pairs) <= nll(UniformModel(m.vocabulary()), pairs));
}

TEST_CASE("trained nll never exceeds uniform nll") {
  std::mt19937_64 rng(8);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.push_back({"q" + std::to_string(rng() % 10), {"w" + std::to_string(rng() % 7), "w" + std::to_string(rng() % 7), kE}});
  }
  for (const double eps : {0.001, 0.01, 0.1, 1.0}) {
    const auto m = MemorizingModel::train(pairs, eps, hashing());
    CHECK(nll(m, pairs) <= nll(UniformModel(m.vocabulary()), pairs));
  }
}

TEST_CASE("larger epsilon moves every conditional toward uniform") {
  std::mt19937_64 rng(9);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back({"q" + std::to_string(rng() % 5), {"w" + std::to_string(rng() % 6), kE}});
  }
  const std::vector<double> eps{1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0};
  std::vector<MemorizingModel> models;
  for (const double e : eps) models.push_back(MemorizingModel::train(pairs, e, hashing()));
  for (const auto& key : models[0].keys()) {
    double previous = INFINITY;
    for (const auto& m : models) {
      const Eigen::VectorXd lp = row(m, key, {});
      const double logv = std::log(static_cast<double>(lp.size()));
      const double kl = (lp.array().exp() * (lp.array() + logv)).sum();
      CHECK(kl <= previous + 1e-12);
      previous = kl;
    }
  }
}

TEST_CASE("distribution property over many contexts") {
  const auto suite = make_memorization_suite(40, 10);
  std::vector<TrainingPair> pairs;
  for (const auto& q : suite.train_queries) pairs.push_back({q.text, {"g", q.gt_targets[0], kE}});
  const auto m = MemorizingModel::train(pairs, 0.01, hashing());
  std::vector<TokenSeq> prefixes{{}, m.vocabulary().encode(Tokens{"g"}), m.vocabulary().encode(Tokens{"g", "t0003"})};
  for (const auto& q : suite.eval_queries) {
    const auto rows = m.score(q.text + " extra", prefixes);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) CHECK(std::abs(rows.row(r).array().exp().sum() - 1) < 1e-6);
  }
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(MemorizingModel::train(std::vector<TrainingPair>{}, 0.01, hashing()), Error);
  try {
    MemorizingModel::train(std::vector<TrainingPair>{}, 0.01, hashing());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyTraining);
  }
  const std::vector<TrainingPair> no_eos{{"q", {"a"}}};
  CHECK_THROWS_AS(MemorizingModel::train(no_eos, 0.01, hashing()), Error);
  const std::vector<TrainingPair> ok{{"q", {"a", kE}}};
  CHECK_THROWS_AS(MemorizingModel::train(ok, 0.0, hashing()), Error);
}

TEST_CASE("model file round-trip and hash check") {
  testing::TempDir dir("lm_file");
  const auto suite = make_memorization_suite(25, 12);
  std::vector<TrainingPair> pairs;
  for (const auto& q : suite.train_queries) pairs.push_back({q.text, {"g", q.gt_targets[0], kE}});
  const Tokens extra{"unused"};
  const auto m = MemorizingModel::train(pairs, 0.05, hashing(), extra);
  m.save(dir / "m.bin", "cafe01");
  std::string stored;
  const auto back = MemorizingModel::load(dir / "m.bin", "cafe01", &stored);
  CHECK(stored == "cafe01");
  CHECK(back.vocabulary() == m.vocabulary());
  CHECK(back.keys() == m.keys());
  CHECK(back.epsilon() == m.epsilon());
  CHECK(back.provider().name() == "hashing");
  CHECK(nll(back, pairs) == nll(m, pairs));
  CHECK(row(back, "unseen words here", {"g"}) == row(m, "unseen words here", {"g"}));
  back.save(dir / "m2.bin", "cafe01");
  CHECK(read_file(dir / "m.bin") == read_file(dir / "m2.bin"));

  try {
    MemorizingModel::load(dir / "m.bin", "other");
    FAIL("expected ConfigMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigMismatch);
  }
  const std::string bytes = read_file(dir / "m.bin");
  atomic_write(dir / "cut.bin", bytes.substr(0, bytes.size() / 2));
  try {
    MemorizingModel::load(dir / "cut.bin");
    FAIL("expected CorruptFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCorruptFile);
  }
}

TEST_CASE("external scorer rows are validated") {
  const Vocabulary vocab(Tokens{"a", "b"});
  const ExternalScorerModel good(vocab, [](std::string_view, std::span<const TokenSeq> p) {
    return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p.size()), 3, -std::log(3.0));
  });
  CHECK(std::abs(good.next_token_logprobs("x", {}).array().exp().sum() - 1) < 1e-12);
  const ExternalScorerModel unnormalized(vocab, [](std::string_view, std::span<const TokenSeq> p) {
    return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size()), 3);
  });
  CHECK_THROWS_AS(unnormalized.next_token_logprobs("x", {}), Error);
  const ExternalScorerModel wrong_shape(vocab, [](std::string_view, std::span<const TokenSeq>) {
    return Eigen::MatrixXd::Constant(1, 2, -std::log(2.0));
  });
  CHECK_THROWS_AS(wrong_shape.next_token_logprobs("x", {}), Error);
}
