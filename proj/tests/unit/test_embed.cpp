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
#include <fstream>
#include <map>
#include <random>

#include "gencmr/embed.hpp"
#include "gencmr/error.hpp"
#include "helpers.hpp"

using namespace gencmr;

namespace {

// Independent bucket trace: FNV-1a 64 over each unigram and space-joined
// bigram, offset basis xor 0x5EED; bucket from the high 63 bits, sign from
// the lowest bit.
std::map<long, double> bucket_trace(const std::vector<std::string>& words, long dim) {
  auto fnv = [](const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ 0x5EEDULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  };
  std::map<long, double> buckets;
  std::vector<std::string> features = words;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) features.push_back(words[i] + " " + words[i + 1]);
  for (const auto& f : features) {
    const std::uint64_t h = fnv(f);
    buckets[static_cast<long>((h >> 1) % static_cast<std::uint64_t>(dim))] += (h & 1) ? -1.0 : 1.0;
  }
  return buckets;
}

}  // namespace

TEST_CASE("single text embeds to a unit row") {
  const HashingEmbedder e;
  const std::vector<std::string> texts{"a"};
  const auto m = embed_texts(e, texts);
  CHECK(m.size() == 1);
  CHECK(m.dim() == 256);
  CHECK(m.normalized);
  CHECK(m.rows.row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embedding is deterministic") {
  const HashingEmbedder e;
  const std::vector<std::string> texts{"a brown dog", "a brown dog"};
  const auto m = embed_texts(e, texts);
  CHECK(m.rows.row(0) == m.rows.row(1));
  CHECK(HashingEmbedder().embed("a brown dog") == e.embed("a brown dog"));
}

TEST_CASE("empty input list") {
  const HashingEmbedder e;
  CHECK_THROWS_AS(embed_texts(e, std::vector<std::string>{}), Error);
}

TEST_CASE("hashing embedder equals the bucket trace") {
  const HashingEmbedder e;
  for (const std::string text : {"a brown dog catches a frisbee", "Dog", "sun sun sun", "x-y z"}) {
    const auto trace = bucket_trace(tokenize(text), 256);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(256);
    for (const auto& [b, v] : trace) expected[b] = v;
    expected.normalize();
    CHECK((e.embed(text) - expected).norm() < 1e-12);
  }
}

TEST_CASE("disjoint vocabularies without bucket collisions are orthogonal") {
  const HashingEmbedder e;
  int checked = 0;
  const std::vector<std::string> pool{"red kite", "blue whale", "green apple", "quiet harbor", "old bridge",
                                      "fast train", "wooden spoon", "silver moon"};
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const auto a = bucket_trace(tokenize(pool[i]), 256);
      const auto b = bucket_trace(tokenize(pool[j]), 256);
      bool shared = false;
      for (const auto& [bucket, v] : a) shared |= b.contains(bucket);
      if (shared) continue;
      ++checked;
      CHECK(cosine(e.embed(pool[i]), e.embed(pool[j])) == 0.0);
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("text without tokens embeds to zero") {
  CHECK(HashingEmbedder().embed(" ,.; ").norm() == 0.0);
}

TEST_CASE("cosine examples") {
  Eigen::Vector3d x(0.3, -1.2, 2.0);
  CHECK(cosine(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
  // 1*2 + 2*1 + 2*2 = 8, |u| = |v| = 3
  const double c = cosine(Eigen::Vector3d(1, 2, 2), Eigen::Vector3d(2, 1, 2));
  CHECK(testing::rel_diff(c, 8.0 / 9.0) < 1e-15);
}

TEST_CASE("cosine errors") {
  CHECK_THROWS_AS(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), Error);
  try {
    cosine(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroVector);
  }
  try {
    cosine(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimMismatch);
  }
}

TEST_CASE("cosine is symmetric and bounded on random inputs") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd u(16), v(16);
    for (int i = 0; i < 16; ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    const double a = cosine(u, v);
    CHECK(a == cosine(v, u));
    CHECK(std::abs(a) <= 1.0 + 1e-9);
    CHECK(std::abs(cosine(u, -u) + 1.0) < 1e-12);
  }
}

TEST_CASE("provider names") {
  CHECK(make_provider("hashing")->name() == "hashing");
  CHECK(make_provider("hashing:64")->dim() == 64);
  CHECK(make_provider("hashing:64")->name() == "hashing:64");
  CHECK_THROWS_AS(make_provider("bert"), Error);
  CHECK_THROWS_AS(make_provider("hashing:0"), Error);
  CHECK_THROWS_AS(make_provider("hashing:12x"), Error);
}

TEST_CASE("embedding file round-trip") {
  testing::TempDir dir("embed_file");
  EmbeddingMatrix<double> m;
  m.rows.resize(3, 4);
  m.rows << 1, 2, 3, 4, 0, 0, 0, 1, -1, 0.5, 0.25, 2;
  save_embeddings(dir / "e.bin", m);

  const auto raw = load_embeddings(dir / "e.bin", 3, false);
  CHECK_FALSE(raw.normalized);
  CHECK(raw.rows == m.rows);  // values exactly representable in float32

  const auto unit = load_embeddings(dir / "e.bin", 3);
  CHECK(unit.normalized);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(unit.rows.row(i).norm() - 1.0) < 1e-6);

  const std::string bytes = read_file(dir / "e.bin");
  CHECK(bytes.size() == 8 + 16 + 12 * 4);
  CHECK(bytes.substr(0, 8) == "GCMREMB1");
}

TEST_CASE("embedding file errors") {
  testing::TempDir dir("embed_errors");
  EmbeddingMatrix<double> m;
  m.rows = RowMatrix<double>::Ones(2, 3);
  save_embeddings(dir / "e.bin", m);
  try {
    load_embeddings(dir / "e.bin", 5);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
  std::string bytes = read_file(dir / "e.bin");
  atomic_write(dir / "short.bin", bytes.substr(0, bytes.size() - 4));
  atomic_write(dir / "magic.bin", "XXXXXXXX" + bytes.substr(8));
  for (const char* name : {"short.bin", "magic.bin"}) {
    try {
      load_embeddings(dir / name, 2);
      FAIL("expected CorruptFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCorruptFile);
    }
  }
}
