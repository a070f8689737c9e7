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

#ifndef GENCMR_TEXT_HPP_
#define GENCMR_TEXT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gencmr {

/// NFC-normalizes UTF-8 text. Invalid UTF-8 is rejected with kMalformedRecord.
std::string nfc_normalize(std::string_view utf8);

/// Strips leading and trailing ASCII whitespace.
std::string_view trim(std::string_view text);

/// Lowercases ASCII letters and splits on runs of non-alphanumeric bytes.
/// Bytes >= 0x80 are treated as word characters so multi-byte UTF-8
/// letters stay inside their word.
std::vector<std::string> tokenize(std::string_view text);

/// Fixed English function-word list shared by keyword extraction and
/// cluster keywording.
std::span<const std::string_view> stopwords();
bool is_stopword(std::string_view word);

/// 64-bit FNV-1a whose offset basis is xor-ed with `seed`.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

std::string join(std::span<const std::string> parts, std::string_view sep);

}  // namespace gencmr

#endif  // GENCMR_TEXT_HPP_
