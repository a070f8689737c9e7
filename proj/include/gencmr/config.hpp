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

#ifndef GENCMR_CONFIG_HPP_
#define GENCMR_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gencmr/eval.hpp"

namespace gencmr {

struct ExperimentPaths {
  std::filesystem::path corpus;
  std::filesystem::path queries;        // evaluation queries
  std::filesystem::path train_queries;  // defaults to `queries`
  std::filesystem::path sid_table;
  std::filesystem::path model;
  std::filesystem::path embeddings;  // optional precomputed target embeddings
  std::filesystem::path report_dir;
};

struct SweepAxes {
  std::vector<int> beams{10, 20, 30, 40, 50};
  std::vector<int> ks{16, 32, 64, 128};
  std::vector<int> ms{2, 3, 4, 5};
};

struct ExperimentConfig {
  ExperimentPaths paths;
  BenchmarkSettings settings;
  std::uint64_t seed = 0;
  std::optional<double> min_r1;
  std::optional<double> min_r5;
  SweepAxes sweep;
};

// Per-stage seeds are fixed offsets from the top-level seed.
enum class Stage : std::uint64_t { kKMeans = 1, kSynthetic = 2 };
std::uint64_t stage_seed(std::uint64_t seed, Stage stage);

/// Parses a JSON config object; unknown keys are rejected. Relative paths
/// are resolved against `base_dir`. Call finalize_config after overrides.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Recomputes derived fields (stage seeds) and checks parameter ranges.
void finalize_config(ExperimentConfig& config);

/// Threshold violations as human-readable lines; empty when all hold.
std::vector<std::string> threshold_violations(const ExperimentConfig& config, const MetricReport& report);

}  // namespace gencmr

#endif  // GENCMR_CONFIG_HPP_
