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

#include <string>
#include <vector>

#include "gencmr/error.hpp"
#include "gencmr/text.hpp"

using namespace gencmr;

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
  CHECK(tokenize("A brown-dog, runs!! 42x") == std::vector<std::string>{"a", "brown", "dog", "runs", "42x"});
  CHECK(tokenize("   ").empty());
  CHECK(tokenize("").empty());
}

TEST_CASE("tokenize keeps non-ASCII letters inside words") {
  CHECK(tokenize("Caf\xC3\xA9 au lait") == std::vector<std::string>{"caf\xC3\xA9", "au", "lait"});
}

TEST_CASE("trim") {
  CHECK(trim("  x y \t\n") == "x y");
  CHECK(trim(" \t ").empty());
}

TEST_CASE("nfc normalization composes combining sequences") {
  // e + COMBINING ACUTE ACCENT -> U+00E9
  CHECK(nfc_normalize("caf\x65\xCC\x81") == "caf\xC3\xA9");
  CHECK(nfc_normalize("plain ascii") == "plain ascii");
  CHECK(nfc_normalize(nfc_normalize("\x41\xCC\x8A")) == nfc_normalize("\x41\xCC\x8A"));
}

TEST_CASE("nfc normalization rejects invalid UTF-8") {
  CHECK_THROWS_AS(nfc_normalize("bad \xFF byte"), Error);
}

TEST_CASE("stop-word list") {
  CHECK(stopwords().size() >= 45);
  CHECK(stopwords().size() <= 60);
  CHECK(is_stopword("the"));
  CHECK(is_stopword("two"));
  CHECK_FALSE(is_stopword("dog"));
  for (const auto w : stopwords()) {
    CHECK(tokenize(w) == std::vector<std::string>{std::string(w)});
  }
}

TEST_CASE("fnv1a64 matches the published 64-bit test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("fnv1a64 seed perturbs the offset basis") {
  CHECK(fnv1a64("", 0x5EED) == (0xcbf29ce484222325ULL ^ 0x5EEDULL));
  CHECK(fnv1a64("dog", 0x5EED) != fnv1a64("dog"));
}

TEST_CASE("join") {
  const std::vector<std::string> parts{"a", "b", "c"};
  CHECK(join(parts, " ") == "a b c");
  CHECK(join(std::vector<std::string>{}, ",").empty());
}
