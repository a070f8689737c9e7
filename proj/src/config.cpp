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

#include "gencmr/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "gencmr/corpus.hpp"
#include "gencmr/error.hpp"

namespace gencmr {

using nlohmann::json;

std::uint64_t stage_seed(std::uint64_t seed, Stage stage) {
  return seed + static_cast<std::uint64_t>(stage);
}

namespace {

std::filesystem::path resolve(const json& value, const std::filesystem::path& base) {
  std::filesystem::path p = value.get<std::string>();
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::vector<int> int_list(const json& value, std::string_view key) {
  if (!value.is_array() || value.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "config: '" + std::string(key) + "' must be a nonempty array");
  }
  return value.get<std::vector<int>>();
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "config: top level must be an object");

  ExperimentConfig c;
  auto& s = c.settings;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "corpus") c.paths.corpus = resolve(value, base_dir);
      else if (key == "queries") c.paths.queries = resolve(value, base_dir);
      else if (key == "train_queries") c.paths.train_queries = resolve(value, base_dir);
      else if (key == "sid_table") c.paths.sid_table = resolve(value, base_dir);
      else if (key == "model") c.paths.model = resolve(value, base_dir);
      else if (key == "embeddings") c.paths.embeddings = resolve(value, base_dir);
      else if (key == "report_dir") c.paths.report_dir = resolve(value, base_dir);
      else if (key == "k") s.sid.k = value.get<int>();
      else if (key == "m") s.sid.m = value.get<int>();
      else if (key == "banned_size") s.sid.banned_size = value.get<int>();
      else if (key == "ngram_max") s.sid.ngram_max = value.get<int>();
      else if (key == "max_iter") s.sid.max_iter = value.get<int>();
      else if (key == "epsilon") s.epsilon = value.get<double>();
      else if (key == "beam") s.beam = value.get<int>();
      else if (key == "gsv_k") s.gsv_k = value.get<std::size_t>();
      else if (key == "gsv") s.gsv = parse_gsv_mode(value.get<std::string>());
      else if (key == "mode") s.mode = parse_ablation(value.get<std::string>());
      else if (key == "verifier") s.verifier = parse_verifier_kind(value.get<std::string>());
      else if (key == "verifier_url") s.verifier_url = value.get<std::string>();
      else if (key == "untrained") s.untrained = value.get<bool>();
      else if (key == "provider") s.provider = value.get<std::string>();
      else if (key == "threads") s.threads = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "min_r1") c.min_r1 = value.get<double>();
      else if (key == "min_r5") c.min_r5 = value.get<double>();
      else if (key == "sweep") {
        for (const auto& [axis, values] : value.items()) {
          if (axis == "beams") c.sweep.beams = int_list(values, axis);
          else if (axis == "k") c.sweep.ks = int_list(values, axis);
          else if (axis == "m") c.sweep.ms = int_list(values, axis);
          else throw Error(ErrorCode::kInvalidArgument, "config: unknown sweep axis '" + axis + "'");
        }
      } else {
        throw Error(ErrorCode::kInvalidArgument, "config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void finalize_config(ExperimentConfig& c) {
  auto& s = c.settings;
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(s.sid.k >= 1, "k must be >= 1");
  require(s.sid.m >= 1, "m must be >= 1");
  require(s.sid.banned_size >= 0, "banned_size must be >= 0");
  require(s.sid.ngram_max >= 1, "ngram_max must be >= 1");
  require(s.sid.max_iter >= 1, "max_iter must be >= 1");
  require(s.epsilon > 0, "epsilon must be > 0");
  require(s.beam >= 1, "beam must be >= 1");
  require(s.gsv_k >= 1, "gsv_k must be >= 1");
  require(s.threads >= 1, "threads must be >= 1");
  s.sid.seed = stage_seed(c.seed, Stage::kKMeans);
  if (c.paths.train_queries.empty()) c.paths.train_queries = c.paths.queries;
}

std::vector<std::string> threshold_violations(const ExperimentConfig& config, const MetricReport& report) {
  std::vector<std::string> out;
  const auto check = [&](const char* name, const std::optional<double>& min, double value) {
    if (!min || value >= *min) return;
    char line[96];
    std::snprintf(line, sizeof(line), "%s %.2f below threshold %.2f", name, value, *min);
    out.emplace_back(line);
  };
  check("R@1", config.min_r1, report.r1);
  check("R@5", config.min_r5, report.r5);
  return out;
}

}  // namespace gencmr
