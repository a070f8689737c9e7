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

#ifndef GENCMR_COMMANDS_HPP_
#define GENCMR_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <string_view>

#include "gencmr/config.hpp"
#include "gencmr/corpus.hpp"
#include "gencmr/sid.hpp"

namespace gencmr {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitThreshold = 3;

/// Entry point of the `gencmr` command line tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Artifact hashes. The SID hash covers corpus, embeddings, provider and
// identifier parameters; the model tag is "<sid hash>/<training hash>".
std::string corpus_hash(const Corpus& corpus);
std::string sid_config_hash(const ExperimentConfig& config, const Corpus& corpus);
std::string model_tag(std::string_view sid_hash, const std::vector<Query>& train_queries, double epsilon);

}  // namespace gencmr

#endif  // GENCMR_COMMANDS_HPP_
