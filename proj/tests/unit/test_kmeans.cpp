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

#include <doctest.h>

#include <random>

#include "gencmr/error.hpp"
#include "gencmr/kmeans.hpp"
#include "helpers.hpp"

using namespace gencmr;

namespace {

RowMatrix<double> random_points(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g;
  RowMatrix<double> p(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) p(i, j) = g(rng);
  }
  return p;
}

double recomputed_inertia(const RowMatrix<double>& points, const ClusterModel<double>& m) {
  double s = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    s += (points.row(i) - m.centroids.row(m.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return s;
}

}  // namespace

TEST_CASE("k equal to the row count gives zero inertia") {
  std::mt19937_64 rng(1);
  const auto p = random_points(rng, 12, 3);
  const auto m = kmeans<double>(p, 12, 50, 3);
  CHECK(m.inertia == 0.0);
  std::vector<int> sorted = m.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::unique(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("two separated blobs are recovered exactly") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  RowMatrix<double> p(20, 2);
  for (int i = 0; i < 20; ++i) {
    const double cx = i < 10 ? -50.0 : 50.0;
    p(i, 0) = cx + u(rng);
    p(i, 1) = u(rng);
  }
  const auto m = kmeans<double>(p, 2, 100, 9);
  for (int i = 1; i < 10; ++i) CHECK(m.labels[static_cast<std::size_t>(i)] == m.labels[0]);
  for (int i = 11; i < 20; ++i) CHECK(m.labels[static_cast<std::size_t>(i)] == m.labels[10]);
  CHECK(m.labels[0] != m.labels[10]);
  const Eigen::RowVector2d mean_a = p.topRows(10).colwise().mean();
  const Eigen::RowVector2d mean_b = p.bottomRows(10).colwise().mean();
  CHECK((m.centroids.row(m.labels[0]) - mean_a).norm() < 1e-12);
  CHECK((m.centroids.row(m.labels[10]) - mean_b).norm() < 1e-12);
  CHECK(m.converged);
}

TEST_CASE("k = 1 gives the global mean and n times the variance") {
  std::mt19937_64 rng(3);
  const auto p = random_points(rng, 30, 4);
  const auto m = kmeans<double>(p, 1, 10, 0);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(4);
  for (int i = 0; i < 30; ++i) mean += p.row(i);
  mean /= 30.0;
  double ss = 0;
  for (int i = 0; i < 30; ++i) ss += (p.row(i) - mean).squaredNorm();
  CHECK((m.centroids.row(0) - mean).norm() < 1e-12);
  CHECK(testing::rel_diff(m.inertia, ss) < 1e-12);
}

TEST_CASE("inertia is non-increasing and matches the assignments") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const int n = 5 + static_cast<int>(rng() % 60);
    const int k = 1 + static_cast<int>(rng() % std::min(n, 8));
    const auto p = random_points(rng, n, 1 + static_cast<int>(rng() % 5));
    const auto m = kmeans<double>(p, k, 100, rng());
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] * (1 + 1e-12));
    }
    CHECK(testing::rel_diff(m.inertia, recomputed_inertia(p, m)) < 1e-6);
    for (const int l : m.labels) CHECK((l >= 0 && l < k));
  }
}

TEST_CASE("identical rows with k > 1") {
  const RowMatrix<double> p = RowMatrix<double>::Constant(6, 2, 1.5);
  const auto m = kmeans<double>(p, 3, 10, 0);
  CHECK(m.inertia == 0.0);
  for (const int l : m.labels) CHECK((l >= 0 && l < 3));
}

TEST_CASE("same seed, same clustering") {
  std::mt19937_64 rng(5);
  const auto p = random_points(rng, 40, 3);
  const auto a = kmeans<double>(p, 5, 100, 77);
  const auto b = kmeans<double>(p, 5, 100, 77);
  CHECK(a.labels == b.labels);
  CHECK(a.centroids == b.centroids);
  CHECK(a.inertia_history == b.inertia_history);
}

TEST_CASE("float scalar") {
  std::mt19937_64 rng(6);
  const RowMatrix<float> p = random_points(rng, 25, 2).cast<float>();
  const auto m = kmeans<float>(p, 3, 100, 1);
  CHECK(m.labels.size() == 25);
  for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
    CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] * (1 + 1e-5f));
  }
}

TEST_CASE("argument errors") {
  const RowMatrix<double> p = RowMatrix<double>::Zero(3, 2);
  try {
    kmeans<double>(p, 4, 10, 0);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kKTooLarge);
  }
  CHECK_THROWS_AS(kmeans<double>(p, 0, 10, 0), Error);
  CHECK_THROWS_AS(kmeans<double>(p, 2, 0, 0), Error);
  CHECK_THROWS_AS(kmeans<double>(RowMatrix<double>(0, 2), 1, 10, 0), Error);
}
