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

#include "gencmr/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gencmr/embed.hpp"
#include "gencmr/error.hpp"
#include "gencmr/eval.hpp"
#include "gencmr/gsv.hpp"
#include "gencmr/lm.hpp"
#include "gencmr/synthetic.hpp"
#include "gencmr/text.hpp"
#include "gencmr/trie.hpp"

namespace gencmr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string corpus_hash(const Corpus& corpus) {
  std::ostringstream s;
  write_corpus(s, corpus);
  return hash_hex(s.str());
}

std::string sid_config_hash(const ExperimentConfig& config, const Corpus& corpus) {
  const auto& s = config.settings;
  const SidOptions o = sid_options_for(s.mode);
  json j = {{"corpus", corpus_hash(corpus)},
            {"provider", s.provider},
            {"k", s.sid.k},
            {"m", s.sid.m},
            {"banned_size", s.sid.banned_size},
            {"ngram_max", s.sid.ngram_max},
            {"max_iter", s.sid.max_iter},
            {"seed", s.sid.seed},
            {"global", o.global},
            {"dedup", o.dedup},
            {"serial_lexical", o.serial_lexical},
            {"suffix_collisions", o.suffix_collisions}};
  j["embeddings"] = config.paths.embeddings.empty() ? "" : hash_hex(read_file(config.paths.embeddings));
  return hash_hex(j.dump());
}

std::string model_tag(std::string_view sid_hash, const std::vector<Query>& train_queries, double epsilon) {
  std::ostringstream s;
  write_queries(s, train_queries);
  const json j = {{"queries", hash_hex(s.str())}, {"epsilon", epsilon}};
  return std::string(sid_hash) + "/" + hash_hex(j.dump());
}

namespace {

struct Flags {
  std::string config;
  std::string corpus, queries, train_queries, sid_table, model, embeddings, report_dir;
  int k = 0, m = 0, banned_size = 0, ngram_max = 0, max_iter = 0, beam = 0, threads = 0;
  std::size_t gsv_k = 0;
  double epsilon = 0;
  std::uint64_t seed = 0;
  std::string gsv, mode, verifier, provider;
  bool untrained = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--corpus", f.corpus, "target corpus (JSONL)");
  cmd->add_option("--queries", f.queries, "evaluation queries (JSONL)");
  cmd->add_option("--train-queries", f.train_queries, "training queries (JSONL); defaults to --queries");
  cmd->add_option("--sid-table", f.sid_table, "SID table file");
  cmd->add_option("--model", f.model, "model file");
  cmd->add_option("--embeddings", f.embeddings, "precomputed target embeddings");
  cmd->add_option("--report-dir", f.report_dir, "directory for report files");
  cmd->add_option("--k", f.k, "cluster count")->check(CLI::PositiveNumber);
  cmd->add_option("--m", f.m, "lexical length")->check(CLI::PositiveNumber);
  cmd->add_option("--banned-size", f.banned_size, "banned keywords per cluster")->check(CLI::NonNegativeNumber);
  cmd->add_option("--ngram-max", f.ngram_max, "longest candidate phrase")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter, "k-means iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--epsilon", f.epsilon, "smoothing");
  cmd->add_option("--beam", f.beam, "beam width")->check(CLI::PositiveNumber);
  cmd->add_option("--gsv", f.gsv, "re-ranking")->check(CLI::IsMember({"off", "topk", "collisions"}));
  cmd->add_option("--gsv-k", f.gsv_k, "re-ranked candidates")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "top-level seed");
  cmd->add_option("--mode", f.mode, "ablation mode")
      ->check(CLI::IsMember({"full", "no_gsv", "no_sid", "no_global", "no_dedup", "no_constraint"}));
  cmd->add_option("--verifier", f.verifier, "verifier")->check(CLI::IsMember({"none", "reference", "oracle", "http"}));
  cmd->add_option("--provider", f.provider, "embedding provider");
  cmd->add_option("--threads", f.threads, "evaluation threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--untrained", f.untrained, "score with a uniform model");
}

ExperimentConfig resolve_config(const CLI::App& cmd, const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  const auto given = [&](const char* name) { return cmd.count(name) > 0; };
  auto& s = c.settings;
  if (given("--corpus")) c.paths.corpus = f.corpus;
  if (given("--queries")) c.paths.queries = f.queries;
  if (given("--train-queries")) c.paths.train_queries = f.train_queries;
  if (given("--sid-table")) c.paths.sid_table = f.sid_table;
  if (given("--model")) c.paths.model = f.model;
  if (given("--embeddings")) c.paths.embeddings = f.embeddings;
  if (given("--report-dir")) c.paths.report_dir = f.report_dir;
  if (given("--k")) s.sid.k = f.k;
  if (given("--m")) s.sid.m = f.m;
  if (given("--banned-size")) s.sid.banned_size = f.banned_size;
  if (given("--ngram-max")) s.sid.ngram_max = f.ngram_max;
  if (given("--max-iter")) s.sid.max_iter = f.max_iter;
  if (given("--epsilon")) s.epsilon = f.epsilon;
  if (given("--beam")) s.beam = f.beam;
  if (given("--gsv")) s.gsv = parse_gsv_mode(f.gsv);
  if (given("--gsv-k")) s.gsv_k = f.gsv_k;
  if (given("--seed")) c.seed = f.seed;
  if (given("--mode")) s.mode = parse_ablation(f.mode);
  if (given("--verifier")) s.verifier = parse_verifier_kind(f.verifier);
  if (given("--provider")) s.provider = f.provider;
  if (given("--threads")) s.threads = f.threads;
  if (given("--untrained")) s.untrained = f.untrained;
  finalize_config(c);
  return c;
}

const fs::path& require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("missing ") + flag);
  return p;
}

std::optional<EmbeddingMatrix<double>> target_embeddings(const ExperimentConfig& c, const Corpus& corpus) {
  if (c.paths.embeddings.empty()) return std::nullopt;
  return load_embeddings(c.paths.embeddings, corpus.size());
}

// Loads the SID table and refuses it unless it was built from this corpus
// with these parameters.
SidTable load_checked_sids(const ExperimentConfig& c, const Corpus& corpus, std::string* sid_hash) {
  SidFileHeader header;
  SidTable table = load_sid_table(require_path(c.paths.sid_table, "--sid-table"), &header);
  if (header.corpus_hash != corpus_hash(corpus)) {
    throw Error(ErrorCode::kConfigMismatch, c.paths.sid_table.string() + ": built from a different corpus");
  }
  const std::string expected = sid_config_hash(c, corpus);
  if (header.config_hash != expected) {
    throw Error(ErrorCode::kConfigMismatch, c.paths.sid_table.string() + ": built for config " +
                                                header.config_hash + ", current config is " + expected +
                                                "; rerun build-ids or pass the same parameters");
  }
  if (sid_hash) *sid_hash = header.config_hash;
  return table;
}

std::string join_tokens(const std::vector<std::string>& tokens) { return join(tokens, " "); }

void write_report_file(const fs::path& dir, const char* name, const std::string& contents) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  atomic_write(dir / name, contents);
}

int cmd_build_ids(const ExperimentConfig& c, std::ostream& out) {
  const Corpus corpus = load_corpus(require_path(c.paths.corpus, "--corpus"));
  const auto provider = make_provider(c.settings.provider);
  const auto embeddings = target_embeddings(c, corpus);
  const SidOptions options = sid_options_for(c.settings.mode);
  const SidTable table =
      build_sids(corpus, *provider, c.settings.sid, options, embeddings ? &*embeddings : nullptr);
  const SidFileHeader header{sid_config_hash(c, corpus), corpus_hash(corpus), c.settings.sid, options,
                             provider->name()};
  save_sid_table(require_path(c.paths.sid_table, "--sid-table"), table, header);
  for (const auto& e : table.entries) out << e.target_id << '\t' << join_tokens(e.sid.tokens()) << '\n';
  out << "targets: " << table.entries.size() << '\n';
  out << "collision groups: " << table.collisions.size() << '\n';
  for (const auto& g : table.collisions) {
    out << "collision: " << join_tokens(g.members) << " <- " << join_tokens(g.tokens) << '\n';
  }
  out << "config_hash: " << header.config_hash << '\n';
  return kExitOk;
}

int cmd_train(const ExperimentConfig& c, std::ostream& out) {
  const Corpus corpus = load_corpus(require_path(c.paths.corpus, "--corpus"));
  std::string sid_hash;
  const SidTable table = load_checked_sids(c, corpus, &sid_hash);
  const auto queries = load_queries(require_path(c.paths.train_queries, "--train-queries"), corpus);
  const auto pairs = training_pairs(queries, table);
  const auto model = MemorizingModel::train(pairs, c.settings.epsilon, make_provider(c.settings.provider),
                                            table.token_inventory());
  const std::string tag = model_tag(sid_hash, queries, c.settings.epsilon);
  model.save(require_path(c.paths.model, "--model"), tag);
  char loss[64];
  std::snprintf(loss, sizeof(loss), "%.6f", nll(model, pairs));
  out << "pairs: " << pairs.size() << '\n'
      << "keys: " << model.keys().size() << '\n'
      << "vocabulary: " << model.vocabulary().size() << '\n'
      << "nll: " << loss << '\n'
      << "model_tag: " << tag << '\n';
  return kExitOk;
}

int cmd_retrieve(const ExperimentConfig& c, const std::string& query, std::size_t top, std::ostream& out,
                 std::ostream& err) {
  const auto& s = c.settings;
  const Corpus corpus = load_corpus(require_path(c.paths.corpus, "--corpus"));
  std::string sid_hash;
  const SidTable table = load_checked_sids(c, corpus, &sid_hash);
  const IdTrie trie = IdTrie::build(table);
  const std::shared_ptr<const EmbeddingProvider> provider = make_provider(s.provider);

  std::unique_ptr<CondTokenModel> model;
  if (s.untrained) {
    model = std::make_unique<UniformModel>(Vocabulary(table.token_inventory()));
  } else {
    std::string stored;
    auto loaded = MemorizingModel::load(require_path(c.paths.model, "--model"), std::nullopt, &stored);
    if (stored.substr(0, stored.find('/')) != sid_hash) {
      throw Error(ErrorCode::kConfigMismatch, c.paths.model.string() + ": trained on a different SID table");
    }
    if (!c.paths.train_queries.empty()) {
      const auto train = load_queries(c.paths.train_queries, corpus);
      if (stored != model_tag(sid_hash, train, s.epsilon)) {
        throw Error(ErrorCode::kConfigMismatch,
                    c.paths.model.string() + ": trained on different queries or epsilon; rerun train");
      }
    }
    model = std::make_unique<MemorizingModel>(std::move(loaded));
  }

  std::vector<Query> oracle_queries;
  std::unique_ptr<Verifier> verifier;
  if (s.mode != AblationMode::kNoGsv && s.gsv != GsvMode::kOff) {
    if (s.verifier == VerifierKind::kOracle) {
      oracle_queries = load_queries(require_path(c.paths.queries, "--queries"), corpus);
    }
    verifier = make_verifier(s, provider, oracle_queries);
  }
  RetrieveOptions options;
  options.beam = s.beam;
  options.gsv_k = s.gsv_k;
  options.gsv = s.mode == AblationMode::kNoGsv ? GsvMode::kOff : s.gsv;
  options.constrained = s.mode != AblationMode::kNoConstraint;

  const RetrievalIndex index{corpus, table, trie, *model};
  const RankedResult ranked = retrieve(nfc_normalize(query), index, verifier.get(), options, &err);
  const std::size_t n = std::min(top, ranked.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = ranked.entries[i];
    char score[64];
    std::snprintf(score, sizeof(score), "%.6f", e.score);
    out << (i + 1) << '\t' << e.target_id << '\t' << score << '\t' << join_tokens(e.tokens) << '\n';
  }
  if (n == 0) out << "no results\n";
  return kExitOk;
}

BenchmarkData load_benchmark(const ExperimentConfig& c) {
  Corpus corpus = load_corpus(require_path(c.paths.corpus, "--corpus"));
  auto eval = load_queries(require_path(c.paths.queries, "--queries"), corpus);
  auto train = load_queries(require_path(c.paths.train_queries, "--train-queries"), corpus);
  auto embeddings = target_embeddings(c, corpus);
  return {std::move(corpus), std::move(train), std::move(eval), std::move(embeddings)};
}

int cmd_eval(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const BenchmarkData data = load_benchmark(c);
  const MetricReport report = run_benchmark(data, c.settings);
  const std::string text = render_report(report);
  write_report_file(c.paths.report_dir, "report.txt", text);
  write_report_file(c.paths.report_dir, "ranks.csv", report_ranks_csv(report));
  out << text;
  const auto violations = threshold_violations(c, report);
  for (const auto& v : violations) err << "threshold: " << v << '\n';
  return violations.empty() ? kExitOk : kExitThreshold;
}

int cmd_sweep(const ExperimentConfig& c, const std::string& axis, std::ostream& out) {
  const BenchmarkData data = load_benchmark(c);
  const auto rows = axis == "beam" ? sweep_beam(data, c.settings, c.sweep.beams)
                                   : sweep_identifier(data, c.settings, c.sweep.ks, c.sweep.ms);
  const std::string table = sweep_table(rows);
  write_report_file(c.paths.report_dir, "sweep.csv", sweep_csv(rows));
  write_report_file(c.paths.report_dir, "sweep.txt", table);
  out << table;
  return kExitOk;
}

int cmd_inspect(const ExperimentConfig& c, const std::string& target_id, std::ostream& out) {
  SidFileHeader header;
  const SidTable table = load_sid_table(require_path(c.paths.sid_table, "--sid-table"), &header);
  if (!table.index_of(target_id)) throw Error(ErrorCode::kUnknownTarget, "no SID for '" + target_id + "'");
  const SidEntry& e = table.at(target_id);
  out << "target_id: " << e.target_id << '\n'
      << "cluster: " << e.cluster << '\n'
      << "global: " << e.sid.global << '\n'
      << "lexical: " << join_tokens(e.sid.lexical) << '\n'
      << "suffix: " << e.sid.suffix << '\n'
      << "tokens: " << join_tokens(e.sid.tokens()) << '\n'
      << "banned: " << join_tokens(table.banned.at(static_cast<std::size_t>(e.cluster))) << '\n';
  if (e.collision_group >= 0) {
    out << "collision_group: "
        << join_tokens(table.collisions.at(static_cast<std::size_t>(e.collision_group)).members) << '\n';
  } else {
    out << "collision_group: none\n";
  }
  out << "config_hash: " << header.config_hash << '\n';
  return kExitOk;
}

int cmd_make_synthetic(const ExperimentConfig& c, const std::string& suite, std::size_t n, std::size_t pairs,
                       const fs::path& dir, std::ostream& out) {
  const std::uint64_t seed = stage_seed(c.seed, Stage::kSynthetic);
  const SyntheticSuite data =
      suite == "memorization"
          ? make_memorization_suite(n, seed)
          : make_collision_suite(n, pairs, c.settings.sid, *make_provider(c.settings.provider), seed);
  fs::create_directories(dir);
  save_corpus(dir / "corpus.jsonl", data.corpus);
  save_queries(dir / "train_queries.jsonl", data.train_queries);
  save_queries(dir / "queries.jsonl", data.eval_queries);
  out << "targets: " << data.corpus.size() << '\n'
      << "train queries: " << data.train_queries.size() << '\n'
      << "eval queries: " << data.eval_queries.size() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gencmr: generative cross-modal retrieval with structured identifiers", "gencmr"};
  app.require_subcommand(1);
  Flags f;

  auto* build = app.add_subcommand("build-ids", "construct and save the SID table");
  auto* train = app.add_subcommand("train", "train the reference model on query/identifier pairs");
  auto* retrieve_cmd = app.add_subcommand("retrieve", "rank targets for one query");
  auto* eval = app.add_subcommand("eval", "evaluate R@1/R@5 on a query set");
  auto* sweep = app.add_subcommand("sweep", "evaluate over a parameter grid");
  auto* inspect = app.add_subcommand("inspect-sid", "show one target's identifier");
  auto* synth = app.add_subcommand("make-synthetic", "write a synthetic benchmark suite");
  for (auto* cmd : {build, train, retrieve_cmd, eval, sweep, inspect, synth}) add_common(cmd, f);

  std::string query;
  std::size_t top = 10;
  retrieve_cmd->add_option("query", query, "query text")->required();
  retrieve_cmd->add_option("--top", top, "results to print")->check(CLI::PositiveNumber);
  std::string axis = "beam";
  sweep->add_option("--axis", axis, "beam or id (cluster k x lexical m)")->check(CLI::IsMember({"beam", "id"}));
  std::string target_id;
  inspect->add_option("target_id", target_id, "target id")->required();
  std::string suite = "memorization";
  std::size_t n = 500;
  std::size_t pairs = 50;
  std::string out_dir;
  synth->add_option("--suite", suite, "memorization or collision")
      ->check(CLI::IsMember({"memorization", "collision"}));
  synth->add_option("--n", n, "targets (memorization) or unique targets (collision)");
  synth->add_option("--pairs", pairs, "colliding pairs (collision suite)");
  synth->add_option("--out-dir", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto* cmd : app.get_subcommands()) {
      const ExperimentConfig c = resolve_config(*cmd, f);
      if (cmd == build) return cmd_build_ids(c, out);
      if (cmd == train) return cmd_train(c, out);
      if (cmd == retrieve_cmd) return cmd_retrieve(c, query, top, out, err);
      if (cmd == eval) return cmd_eval(c, out, err);
      if (cmd == sweep) return cmd_sweep(c, axis, out);
      if (cmd == inspect) return cmd_inspect(c, target_id, out);
      if (cmd == synth) return cmd_make_synthetic(c, suite, n, pairs, out_dir, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace gencmr
