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

#include "gencmr/eval.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

#include "gencmr/error.hpp"
#include "gencmr/synthetic.hpp"

using namespace gencmr;

namespace {

// Queries q0.. with ground truth gt<i>; ranking i places gt<i> at ranks[i]
// (0 = absent) among filler targets.
std::pair<std::vector<RankedResult>, std::vector<Query>> scripted(const std::vector<std::size_t>& ranks) {
  std::vector<RankedResult> results;
  std::vector<Query> queries;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::string gt = "gt" + std::to_string(i);
    queries.push_back({"q" + std::to_string(i), "text", {gt}});
    RankedResult r;
    for (std::size_t pos = 1; pos <= 12; ++pos) {
      r.entries.push_back({pos == ranks[i] ? gt : "f" + std::to_string(pos), -static_cast<double>(pos), {}});
    }
    results.push_back(std::move(r));
  }
  return {results, queries};
}

BenchmarkData memorization_data(std::size_t n, std::uint64_t seed) {
  auto s = make_memorization_suite(n, seed);
  return {std::move(s.corpus), std::move(s.train_queries), std::move(s.eval_queries), std::nullopt};
}

}  // namespace

TEST_CASE("recall on a scripted ranking") {
  const auto [results, queries] = scripted({1, 1, 3, 6, 2, 1, 7, 4, 5, 9});
  CHECK(recall_at_k(results, queries, 1) == doctest::Approx(30.0));
  CHECK(recall_at_k(results, queries, 5) == doctest::Approx(70.0));
  CHECK(first_hit_rank(results[3], queries[3]) == 6);
}

TEST_CASE("recall extremes") {
  const auto [all1, q1] = scripted(std::vector<std::size_t>(8, 1));
  CHECK(recall_at_k(all1, q1, 1) == 100.0);
  CHECK(recall_at_k(all1, q1, 5) == 100.0);
  const auto [all2, q2] = scripted(std::vector<std::size_t>(8, 2));
  CHECK(recall_at_k(all2, q2, 1) == 0.0);
  CHECK(recall_at_k(all2, q2, 5) == 100.0);
  const auto [miss, q3] = scripted({0, 0});
  CHECK(recall_at_k(miss, q3, 10) == 0.0);
  CHECK(first_hit_rank(miss[0], q3[0]) == 0);
}

TEST_CASE("recall counts any of several ground-truth targets") {
  RankedResult r;
  r.entries = {{"a", -1, {}}, {"b", -2, {}}, {"c", -3, {}}};
  const Query q{"q", "t", {"c", "b"}};
  CHECK(first_hit_rank(r, q) == 2);
}

TEST_CASE("recall errors") {
  CHECK_THROWS_AS(recall_at_k({}, {}, 1), Error);
  try {
    recall_at_k({}, {}, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoQueries);
  }
  const auto [results, queries] = scripted({1, 2});
  CHECK_THROWS_AS(recall_at_k(results, queries, 0), Error);
  CHECK_THROWS_AS(recall_at_k(std::span(results).first(1), queries, 1), Error);
}

TEST_CASE("recall is monotone in k") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::size_t> ranks(1 + rng() % 30);
    for (auto& r : ranks) r = rng() % 13;
    const auto [results, queries] = scripted(ranks);
    double prev = 0;
    for (std::size_t k = 1; k <= 13; ++k) {
      const double now = recall_at_k(results, queries, k);
      CHECK(now >= prev);
      prev = now;
    }
  }
}

TEST_CASE("benchmark report") {
  const auto data = memorization_data(40, 5);
  BenchmarkSettings s;
  s.sid.k = 4;
  const auto report = run_benchmark(data, s);
  CHECK(report.r1 == 100.0);
  CHECK(report.rsum == report.r1 + report.r5);
  CHECK(report.ranks.size() == 40);
  CHECK(report.config_hash == hash_hex(report.config_echo));
  const std::string text = render_report(report);
  CHECK(text == render_report(run_benchmark(data, s)));
  CHECK(text.find("R@1") != std::string::npos);
  const std::string csv = report_ranks_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
}

TEST_CASE("settings hash tracks settings") {
  BenchmarkSettings a;
  BenchmarkSettings b;
  CHECK(settings_json(a) == settings_json(b));
  b.beam = 20;
  CHECK(settings_json(a) != settings_json(b));
}

TEST_CASE("beam sweep rows") {
  const auto data = memorization_data(30, 8);
  BenchmarkSettings s;
  s.sid.k = 4;
  const std::vector<int> beams{10, 20, 30, 40, 50};
  const auto rows = sweep_beam(data, s, beams);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].beam == beams[i]);
    CHECK(rows[i].k == 4);
    CHECK(rows[i].report.rsum == rows[i].report.r1 + rows[i].report.r5);
  }
  const std::string csv = sweep_csv(rows);
  CHECK(csv.starts_with("k,m,beam,r1,r5,rsum\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK_FALSE(sweep_table(rows).empty());
}

TEST_CASE("identifier sweep covers the grid") {
  const auto data = memorization_data(30, 9);
  BenchmarkSettings s;
  const std::vector<int> ks{2, 4};
  const std::vector<int> ms{2, 3, 4};
  const auto rows = sweep_identifier(data, s, ks, ms);
  CHECK(rows.size() == 6);
  CHECK(rows.front().k == 2);
  CHECK(rows.front().m == 2);
  CHECK(rows.back().k == 4);
  CHECK(rows.back().m == 4);
}

TEST_CASE("ablation options") {
  CHECK(sid_options_for(AblationMode::kFull).global);
  CHECK(sid_options_for(AblationMode::kFull).dedup);
  CHECK_FALSE(sid_options_for(AblationMode::kNoGlobal).global);
  CHECK_FALSE(sid_options_for(AblationMode::kNoDedup).dedup);
  CHECK(sid_options_for(AblationMode::kNoSid).serial_lexical);
  CHECK(sid_options_for(AblationMode::kNoGsv).suffix_collisions);
  for (const auto m : {AblationMode::kFull, AblationMode::kNoGsv, AblationMode::kNoSid, AblationMode::kNoGlobal,
                       AblationMode::kNoDedup, AblationMode::kNoConstraint}) {
    CHECK(parse_ablation(ablation_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_ablation("none"), Error);
  for (const auto v : {VerifierKind::kNone, VerifierKind::kReference, VerifierKind::kOracle, VerifierKind::kHttp}) {
    CHECK(parse_verifier_kind(verifier_kind_name(v)) == v);
  }
}

TEST_CASE("untrained no_constraint model falls to chance") {
  const auto data = memorization_data(50, 4);
  BenchmarkSettings s;
  s.sid.k = 4;
  s.mode = AblationMode::kNoConstraint;
  s.untrained = true;
  s.gsv = GsvMode::kOff;
  CHECK(run_benchmark(data, s).r1 < 20.0);
}
