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

#ifndef GENCMR_KMEANS_HPP_
#define GENCMR_KMEANS_HPP_

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gencmr/embed.hpp"
#include "gencmr/error.hpp"

namespace gencmr {

template <typename Scalar>
struct ClusterModel {
  int k = 0;
  RowMatrix<Scalar> centroids;
  std::vector<int> labels;
  /// Sum of squared distances from each point to its assigned centroid.
  Scalar inertia = 0;
  /// Inertia after every assignment step, initial assignment first.
  std::vector<Scalar> inertia_history;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// 53-bit uniform in [0, 1) straight from the engine, so the draw sequence
// does not depend on the standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Scalar>
Scalar assign_labels(const RowMatrix<Scalar>& points, const RowMatrix<Scalar>& centroids,
                     std::vector<int>& labels, std::vector<Scalar>& dist) {
  Scalar inertia = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const Scalar d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {  // strict: ties keep the lower centroid index
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = best_d;
    inertia += best_d;
  }
  return inertia;
}

template <typename Scalar>
RowMatrix<Scalar> kmeanspp_init(const RowMatrix<Scalar>& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  RowMatrix<Scalar> centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::vector<Scalar> d2(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());

  Eigen::Index first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  for (int c = 0; c < k; ++c) {
    Eigen::Index pick = first;
    if (c > 0) {
      Scalar total = 0;
      for (Eigen::Index i = 0; i < n; ++i) total += d2[static_cast<std::size_t>(i)];
      pick = -1;
      if (total > 0) {
        const Scalar r = static_cast<Scalar>(uniform01(rng)) * total;
        Scalar acc = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Scalar w = d2[static_cast<std::size_t>(i)];
          if (w <= 0) continue;
          acc += w;
          pick = i;
          if (acc > r) break;
        }
      }
      if (pick < 0) {
        // Every point coincides with a chosen centroid: duplicates allowed.
        for (Eigen::Index i = 0; i < n; ++i) {
          if (!chosen[static_cast<std::size_t>(i)]) {
            pick = i;
            break;
          }
        }
        if (pick < 0) pick = 0;
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = (points.row(i) - centroids.row(c)).squaredNorm();
      auto& slot = d2[static_cast<std::size_t>(i)];
      if (d < slot) slot = d;
    }
  }
  return centroids;
}

}  // namespace detail

/// Lloyd iterations from a k-means++ seeding. Stops when an assignment
/// step changes no label or after `max_iter` update steps. Clusters that
/// lose every point are re-seeded with the point farthest from its
/// centroid (lowest index on ties).
template <typename Scalar>
ClusterModel<Scalar> kmeans(const RowMatrix<Scalar>& points, int k, int max_iter,
                            std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "no points to cluster");
  if (k > n) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " > rows=" + std::to_string(n));
  }
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");

  std::mt19937_64 rng(seed);
  ClusterModel<Scalar> model;
  model.k = k;
  model.centroids = detail::kmeanspp_init(points, k, rng);
  model.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<Scalar> dist(static_cast<std::size_t>(n), 0);
  model.inertia = detail::assign_labels(points, model.centroids, model.labels, dist);
  model.inertia_history.push_back(model.inertia);

  std::vector<int> previous;
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k));
  for (int iter = 0; iter < max_iter; ++iter) {
    previous = model.labels;

    model.centroids.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = model.labels[static_cast<std::size_t>(i)];
      model.centroids.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<bool> reseeded(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        model.centroids.row(c) /= static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (reseeded[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
      }
      reseeded[static_cast<std::size_t>(far)] = true;
      model.centroids.row(c) = points.row(far);
      dist[static_cast<std::size_t>(far)] = 0;
    }

    model.inertia = detail::assign_labels(points, model.centroids, model.labels, dist);
    model.inertia_history.push_back(model.inertia);
    model.iterations = iter + 1;
    if (model.labels == previous) {
      model.converged = true;
      break;
    }
  }
  return model;
}

}  // namespace gencmr

#endif  // GENCMR_KMEANS_HPP_
