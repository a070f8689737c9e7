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

#include "gencmr/embed.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gencmr/corpus.hpp"
#include "gencmr/text.hpp"

namespace gencmr {

static_assert(std::endian::native == std::endian::little,
              "embedding files are read and written as native little-endian");

HashingEmbedder::HashingEmbedder(Eigen::Index dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
}

std::string HashingEmbedder::name() const {
  return dim_ == kDefaultDim ? "hashing" : "hashing:" + std::to_string(dim_);
}

Eigen::VectorXd HashingEmbedder::embed_tokens(std::span<const std::string> tokens) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  auto add = [&](std::string_view feature) {
    const std::uint64_t h = fnv1a64(feature, kSeed);
    const auto bucket = static_cast<Eigen::Index>((h >> 1) % static_cast<std::uint64_t>(dim_));
    v[bucket] += (h & 1U) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
  }
  return v;
}

Eigen::VectorXd HashingEmbedder::embed(std::string_view text) const {
  Eigen::VectorXd v = embed_tokens(tokenize(text));
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

std::unique_ptr<EmbeddingProvider> make_provider(std::string_view name) {
  if (name == "hashing") return std::make_unique<HashingEmbedder>();
  constexpr std::string_view kPrefix = "hashing:";
  if (name.starts_with(kPrefix)) {
    const std::string dim(name.substr(kPrefix.size()));
    try {
      std::size_t used = 0;
      const long value = std::stol(dim, &used);
      if (used == dim.size() && value > 0) return std::make_unique<HashingEmbedder>(value);
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown embedding provider '" + std::string(name) + "'");
}

EmbeddingMatrix<double> embed_texts(const EmbeddingProvider& provider,
                                    std::span<const std::string> texts) {
  if (texts.empty()) throw Error(ErrorCode::kEmptyInput, "no texts to embed");
  EmbeddingMatrix<double> out;
  out.rows.resize(static_cast<Eigen::Index>(texts.size()), provider.dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = provider.embed(texts[i]).transpose();
  }
  normalize_rows(out.rows);
  out.normalized = true;
  return out;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix<double>& m) {
  std::ostringstream out;
  out.write(kEmbeddingMagic.data(), static_cast<std::streamsize>(kEmbeddingMagic.size()));
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(m.size()),
                                   static_cast<std::uint64_t>(m.dim())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const RowMatrix<float> values = m.rows.cast<float>();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  atomic_write(path, out.str());
}

EmbeddingMatrix<double> load_embeddings(const std::filesystem::path& path,
                                        std::uint64_t expected_rows, bool normalize) {
  const std::string bytes = read_file(path);
  constexpr std::size_t kHeader = 8 + 2 * sizeof(std::uint64_t);
  if (bytes.size() < kHeader || std::string_view(bytes).substr(0, 8) != kEmbeddingMagic) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": bad magic or truncated header");
  }
  std::uint64_t rows = 0;
  std::uint64_t dim = 0;
  std::memcpy(&rows, bytes.data() + 8, sizeof(rows));
  std::memcpy(&dim, bytes.data() + 16, sizeof(dim));
  if (rows != expected_rows) {
    throw Error(ErrorCode::kShapeMismatch, path.string() + ": " + std::to_string(rows) +
                                               " rows, expected " + std::to_string(expected_rows));
  }
  if (dim == 0 || rows > (bytes.size() - kHeader) / sizeof(float) / dim ||
      bytes.size() - kHeader != rows * dim * sizeof(float)) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": payload size does not match header");
  }
  RowMatrix<float> values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::memcpy(values.data(), bytes.data() + kHeader, rows * dim * sizeof(float));
  if (!values.allFinite()) throw Error(ErrorCode::kCorruptFile, path.string() + ": non-finite value");
  EmbeddingMatrix<double> out;
  out.rows = values.cast<double>();
  if (normalize) {
    normalize_rows(out.rows);
    out.normalized = true;
  }
  return out;
}

}  // namespace gencmr
