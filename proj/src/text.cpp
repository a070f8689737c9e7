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

#include "gencmr/text.hpp"

#include <unicode/errorcode.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <unordered_set>

#include "gencmr/error.hpp"

namespace gencmr {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyDescriptor: return "EmptyDescriptor";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kUnknownTarget: return "UnknownTarget";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidPrefix: return "InvalidPrefix";
    case ErrorCode::kEmptyTraining: return "EmptyTraining";
    case ErrorCode::kEmptyTrie: return "EmptyTrie";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kNoQueries: return "NoQueries";
    case ErrorCode::kVerifierFailure: return "VerifierFailure";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 55> kStopwords = {
    "a",     "an",    "the",   "and",   "or",    "but",   "of",    "at",
    "by",    "for",   "with",  "from",  "to",    "in",    "on",    "into",
    "onto",  "as",    "than",  "then",  "there", "here",  "this",  "that",
    "these", "those", "is",    "are",   "was",   "were",  "be",    "been",
    "being", "it",    "its",   "his",   "her",   "their", "they",  "he",
    "she",   "we",    "you",   "while", "some",  "one",   "two",   "three",
    "four",  "five",  "six",   "seven", "eight", "nine",  "ten",
};

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::string nfc_normalize(std::string_view utf8) {
  icu::ErrorCode status;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (status.isFailure()) {
    throw Error(ErrorCode::kIo, std::string("ICU NFC unavailable: ") + status.errorName());
  }
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  // fromUTF8 maps invalid sequences to U+FFFD; reject them instead of
  // silently rewriting the input.
  if (source.indexOf(static_cast<UChar>(0xFFFD)) >= 0 &&
      utf8.find("\xEF\xBF\xBD") == std::string_view::npos) {
    throw Error(ErrorCode::kMalformedRecord, "invalid UTF-8");
  }
  if (nfc->isNormalized(source, status) && status.isSuccess()) {
    return std::string(utf8);
  }
  status.reset();
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (status.isFailure()) {
    throw Error(ErrorCode::kMalformedRecord, std::string("NFC failed: ") + status.errorName());
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\n\r\f\v";
  const auto begin = text.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(kSpace);
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::span<const std::string_view> stopwords() { return kStopwords; }

bool is_stopword(std::string_view word) {
  static const std::unordered_set<std::string_view> set(kStopwords.begin(), kStopwords.end());
  return set.contains(word);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t hash = 14695981039346656037ULL ^ seed;
  for (const char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace gencmr
