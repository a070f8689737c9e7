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

#ifndef GENCMR_EMBED_HPP_
#define GENCMR_EMBED_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "gencmr/error.hpp"

namespace gencmr {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One row per item, aligned to item order. When `normalized` is set every
/// row has unit L2 norm, except rows of token-free texts which are zero.
template <typename Scalar = double>
struct EmbeddingMatrix {
  RowMatrix<Scalar> rows;
  bool normalized = false;

  Eigen::Index dim() const { return rows.cols(); }
  Eigen::Index size() const { return rows.rows(); }
};

/// Normalizes each nonzero row to unit length in place.
template <typename Derived>
void normalize_rows(Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto norm = m.row(i).norm();
    if (norm > 0) m.row(i) /= norm;
  }
}

/// dot(u, v) / (|u| |v|), clamped to [-1, 1].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u,
                                 const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) throw Error(ErrorCode::kZeroVector, "cosine of zero vector");
  const Scalar c = u.cwiseProduct(v.template cast<Scalar>()).sum() / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual bool deterministic() const = 0;
  /// Unit-norm embedding; zero for texts without tokens.
  virtual Eigen::VectorXd embed(std::string_view text) const = 0;
};

// Signed feature hashing over word unigrams and adjacent-word bigrams,
// then L2 normalization. Bigram features hash the two words joined by a
// single space. Bucket = (h >> 1) mod dim, sign = -1 when h's lowest bit
// is set.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  static constexpr Eigen::Index kDefaultDim = 256;
  static constexpr std::uint64_t kSeed = 0x5EED;

  explicit HashingEmbedder(Eigen::Index dim = kDefaultDim);

  std::string name() const override;
  Eigen::Index dim() const override { return dim_; }
  bool deterministic() const override { return true; }
  Eigen::VectorXd embed(std::string_view text) const override;

  /// Unnormalized feature counts of an already-tokenized text.
  Eigen::VectorXd embed_tokens(std::span<const std::string> tokens) const;

 private:
  Eigen::Index dim_;
};

/// "hashing" or "hashing:<dim>".
std::unique_ptr<EmbeddingProvider> make_provider(std::string_view name);

/// Embeds each text; row i belongs to texts[i]. Throws kEmptyInput on an
/// empty list.
EmbeddingMatrix<double> embed_texts(const EmbeddingProvider& provider,
                                    std::span<const std::string> texts);

// Binary interchange file, little-endian:
//   8-byte magic "GCMREMB1", u64 row count, u64 dim, rows*dim float32 row-major.
inline constexpr std::string_view kEmbeddingMagic = "GCMREMB1";

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix<double>& m);
EmbeddingMatrix<double> load_embeddings(const std::filesystem::path& path,
                                        std::uint64_t expected_rows, bool normalize = true);

}  // namespace gencmr

#endif  // GENCMR_EMBED_HPP_
