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

#include "gencmr/synthetic.hpp"

#include <array>
#include <map>
#include <random>
#include <set>
#include <string_view>
#include <tuple>

#include "gencmr/error.hpp"

namespace gencmr {

namespace {

constexpr std::array<std::string_view, 60> kAdjectives = {
    "red",    "blue",    "green",   "yellow",  "black",  "white",   "brown",  "gray",   "orange",
    "purple", "pink",    "golden",  "silver",  "tiny",   "huge",    "small",  "large",  "tall",
    "short",  "young",   "old",     "happy",   "sleepy", "angry",   "shiny",  "dusty",  "muddy",
    "wet",    "dry",     "fluffy",  "striped", "spotted", "wooden", "metal",  "plastic", "bright",
    "dark",   "quiet",   "noisy",   "fast",    "slow",   "curious", "playful", "lazy",  "proud",
    "shy",    "clever",  "brave",   "gentle",  "wild",   "calm",    "busy",   "lonely", "hungry",
    "thirsty", "cheerful", "rusty", "frozen",  "sandy",  "smoky"};

constexpr std::array<std::string_view, 80> kNouns = {
    "dog",      "cat",     "horse",    "bird",    "child",    "man",      "woman",    "boy",
    "girl",     "cyclist", "skater",   "surfer",  "dancer",   "farmer",   "chef",     "painter",
    "runner",   "swimmer", "climber",  "fisherman", "puppy",  "kitten",   "rabbit",   "fox",
    "deer",     "goat",    "sheep",    "cow",     "duck",     "goose",    "parrot",   "owl",
    "eagle",    "turtle",  "frog",     "lizard",  "squirrel", "monkey",   "bear",     "tiger",
    "lion",     "zebra",   "giraffe",  "elephant", "camel",   "pony",     "donkey",   "hamster",
    "robot",    "clown",   "pilot",    "sailor",  "soldier",  "student",  "teacher",  "doctor",
    "nurse",    "musician", "guitarist", "drummer", "singer", "juggler",  "acrobat",  "hiker",
    "camper",   "tourist", "vendor",   "baker",   "butcher",  "mechanic", "gardener", "plumber",
    "driver",   "rider",   "jockey",   "wrestler", "boxer",   "golfer",   "archer",   "knight"};

constexpr std::array<std::string_view, 40> kVerbs = {
    "runs",   "jumps",   "sits",    "sleeps",  "walks",   "plays",  "waits",   "rests",
    "stands", "eats",    "drinks",  "climbs",  "swims",   "dances", "sings",   "reads",
    "writes", "paints",  "cooks",   "laughs",  "smiles",  "watches", "chases", "carries",
    "pulls",  "pushes",  "throws",  "catches", "kicks",   "rides",  "drives",  "flies",
    "crawls", "hides",   "searches", "wanders", "races",  "rolls",  "slides",  "digs"};

constexpr std::array<std::string_view, 50> kPlaces = {
    "park",     "beach",    "field",   "forest",   "river",    "lake",     "street",  "garden",
    "kitchen",  "bridge",   "mountain", "desert",  "meadow",   "harbor",   "market",  "stadium",
    "library",  "museum",   "station", "airport",  "farm",     "barn",     "church",  "school",
    "hospital", "playground", "alley", "square",   "plaza",    "fountain", "pier",    "dock",
    "cliff",    "valley",   "canyon",  "island",   "jungle",   "swamp",    "cave",    "tunnel",
    "rooftop",  "balcony",  "porch",   "yard",     "courtyard", "highway", "subway",  "trail",
    "campsite", "orchard"};

constexpr std::array<std::string_view, 4> kPrepositions = {"in", "on", "at", "by"};
constexpr std::array<std::string_view, 9> kCounts = {"two", "three", "four", "five", "six",
                                                      "seven", "eight", "nine", "ten"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& words, std::mt19937_64& rng) {
  return words[static_cast<std::size_t>(rng() % N)];
}

using ContentKey = std::tuple<std::string_view, std::string_view, std::string_view, std::string_view,
                              std::string_view>;

// One caption: "<lead> <adj> <noun> <verb> <prep> the <adj2> <place>".
struct Caption {
  ContentKey content;
  std::string_view prep;

  std::string render(std::string_view lead) const {
    const auto& [adj, noun, verb, adj2, place] = content;
    std::string out;
    if (!lead.empty()) {
      out += lead;
      out += ' ';
    }
    out += std::string(adj) + " " + std::string(noun) + " " + std::string(verb) + " " + std::string(prep) +
           " the " + std::string(adj2) + " " + std::string(place);
    return out;
  }
};

class CaptionSource {
 public:
  explicit CaptionSource(std::uint64_t seed) : rng_(seed) {}

  Caption draw() {
    for (;;) {
      const auto adj = pick(kAdjectives, rng_);
      auto adj2 = pick(kAdjectives, rng_);
      if (adj2 == adj) continue;
      Caption c{{adj, pick(kNouns, rng_), pick(kVerbs, rng_), adj2, pick(kPlaces, rng_)},
                pick(kPrepositions, rng_)};
      if (used_.insert(c.content).second) return c;
    }
  }

  std::pair<std::string_view, std::string_view> draw_counts() {
    const auto a = pick(kCounts, rng_);
    auto b = pick(kCounts, rng_);
    while (b == a) b = pick(kCounts, rng_);
    return {a, b};
  }

  std::string_view article() { return (rng_() & 1U) ? "a" : "the"; }

 private:
  std::mt19937_64 rng_;
  std::set<ContentKey> used_;
};

std::string padded(std::string_view prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return std::string(prefix) + digits;
}

}  // namespace

SyntheticSuite make_memorization_suite(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kEmptyCorpus, "synthetic suite needs at least one target");
  CaptionSource source(seed);
  std::vector<Target> targets;
  std::vector<Query> queries;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = padded("t", i, 4);
    const std::string text = source.draw().render(source.article());
    targets.push_back({id, text, Direction::kToImage});
    queries.push_back({padded("q", i, 4), text, {id}});
  }
  return {Corpus(std::move(targets)), queries, queries};
}

SyntheticSuite make_collision_suite(std::size_t n_unique, std::size_t n_pairs, const SidParams& params,
                                    const EmbeddingProvider& provider, std::uint64_t seed) {
  CaptionSource source(seed);
  struct Single {
    std::string article;
    Caption caption;
  };
  struct Pair {
    Caption caption;
    std::string_view count_a, count_b;
  };
  std::vector<Single> singles;
  for (std::size_t i = 0; i < n_unique; ++i) singles.push_back({std::string(source.article()), source.draw()});
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto caption = source.draw();
    const auto [a, b] = source.draw_counts();
    pairs.push_back({caption, a, b});
  }

  auto single_id = [](std::size_t i) { return padded("t", i, 4); };
  auto pair_id = [](std::size_t i, char member) { return padded("p", i, 4) + member; };

  constexpr int kMaxRounds = 200;
  for (int round = 0; round < kMaxRounds; ++round) {
    std::vector<Target> targets;
    for (std::size_t i = 0; i < singles.size(); ++i) {
      targets.push_back({single_id(i), singles[i].caption.render(singles[i].article), Direction::kToImage});
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      targets.push_back({pair_id(i, 'a'), pairs[i].caption.render(pairs[i].count_a), Direction::kToImage});
      targets.push_back({pair_id(i, 'b'), pairs[i].caption.render(pairs[i].count_b), Direction::kToImage});
    }
    Corpus corpus(targets);
    const SidTable sids = build_sids(corpus, provider, params);

    std::set<std::size_t> bad_singles;
    std::set<std::size_t> good_pairs;
    for (const auto& group : sids.collisions) {
      const bool designed = group.members.size() == 2 && group.members[0].front() == 'p' &&
                            group.members[0].substr(0, 5) == group.members[1].substr(0, 5);
      if (designed) {
        good_pairs.insert(std::stoul(group.members[0].substr(1, 4)));
        continue;
      }
      for (const auto& id : group.members) {
        if (id.front() == 't') bad_singles.insert(std::stoul(id.substr(1)));
      }
    }
    if (bad_singles.empty() && good_pairs.size() == pairs.size()) {
      SyntheticSuite suite{corpus, {}, {}};
      for (std::size_t i = 0; i < singles.size(); ++i) {
        const auto& t = targets[i];
        suite.train_queries.push_back({"train-" + t.target_id, t.descriptor, {t.target_id}});
        suite.eval_queries.push_back({"q-" + t.target_id, t.descriptor, {t.target_id}});
      }
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string shared = pairs[i].caption.render("");
        for (const char member : {'a', 'b'}) {
          const std::string id = pair_id(i, member);
          suite.train_queries.push_back({"train-" + id, shared, {id}});
          suite.eval_queries.push_back({"q-" + id, corpus.at(id).descriptor, {id}});
        }
      }
      return suite;
    }
    for (const std::size_t i : bad_singles) singles[i].caption = source.draw();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (good_pairs.contains(i)) continue;
      // Alternate between new counting words and a new caption.
      if (round % 2 == 0) {
        std::tie(pairs[i].count_a, pairs[i].count_b) = source.draw_counts();
      } else {
        pairs[i].caption = source.draw();
      }
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "could not realize the requested collision pairs");
}

}  // namespace gencmr
