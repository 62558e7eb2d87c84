/*
 * Copyright 2026 The AusRec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oracles.hpp"

#include <ausrec/eval.hpp>

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace ausrec;

namespace {

RankingResult single(std::vector<Index> top, std::vector<Index> relevant) {
  RankingResult r;
  r.k_max = static_cast<Index>(top.size());
  r.users = {0};
  r.top = {std::move(top)};
  r.relevant = {std::move(relevant)};
  return r;
}

// Full-sort oracle for one user.
std::vector<Index> oracle_top(const Matrix& scores, Index u,
                              const SparseMatrix& train, Index k) {
  std::vector<Index> items;
  for (Index v = 0; v < scores.cols(); ++v) {
    if (!train.contains(u, v)) {
      items.push_back(v);
    }
  }
  std::stable_sort(items.begin(), items.end(), [&](Index a, Index b) {
    return scores(u, a) > scores(u, b);
  });
  items.resize(std::min<std::size_t>(items.size(), k));
  return items;
}

}  // namespace

TEST_CASE("ranking hand cases") {
  Matrix scores(1, 3);
  scores << 3, 1, 2;
  const SparseMatrix none(1, 3);
  const auto all = SparseMatrix::from_pattern(1, 3, {{0, 0}});
  RankingResult r = rank_scores(scores, none, all, 3);
  CHECK(r.top[0] == std::vector<Index>{0, 2, 1});
  const auto masked = SparseMatrix::from_pattern(1, 3, {{0, 0}});
  const auto test = SparseMatrix::from_pattern(1, 3, {{0, 1}});
  r = rank_scores(scores, masked, test, 3);
  CHECK(r.top[0] == std::vector<Index>{2, 1});
  Matrix ties = Matrix::Constant(1, 4, 1.0);
  r = rank_scores(ties, SparseMatrix(1, 4), SparseMatrix::from_pattern(1, 4, {{0, 3}}), 4);
  CHECK(r.top[0] == std::vector<Index>{0, 1, 2, 3});
}

TEST_CASE("users without held-out items are skipped") {
  Matrix scores = Matrix::Zero(3, 4);
  const auto test = SparseMatrix::from_pattern(3, 4, {{1, 2}});
  const RankingResult r = rank_scores(scores, SparseMatrix(3, 4), test, 4);
  CHECK(r.users == std::vector<Index>{1});
  CHECK(r.relevant[0] == std::vector<Index>{2});
}

TEST_CASE("recall hand cases") {
  CHECK(recall_at_k(single({7, 1, 2, 3, 4, 5}, {7}), 5) == 1.0);
  CHECK(recall_at_k(single({1, 2, 3, 4, 5, 7}, {7}), 5) == 0.0);
  CHECK(recall_at_k(single({1, 2, 7, 4, 5, 9}, {7, 9}), 5) == 0.5);
  CHECK(recall_at_k(single({1, 2, 7, 4, 5, 9}, {7, 9}), 6) == 1.0);
}

TEST_CASE("ndcg hand cases") {
  CHECK(ndcg_at_k(single({7, 1, 2, 3, 4}, {7}), 5) == 1.0);
  CHECK(ndcg_at_k(single({1, 7, 2, 3, 4}, {7}), 5) == 1.0 / std::log2(3.0));
  CHECK(ndcg_at_k(single({1, 2, 3, 4, 5}, {7}), 5) == 0.0);
  // Two relevant at ranks 1 and 3: (1 + 1/2) / (1 + 1/log2 3).
  CHECK(ndcg_at_k(single({7, 1, 9, 3, 4}, {7, 9}), 5) ==
        doctest::Approx(1.5 / (1.0 + 1.0 / std::log2(3.0))).epsilon(1e-15));
  // More relevant items than slots: the ideal list is all hits.
  CHECK(ndcg_at_k(single({7, 9}, {7, 9, 11}), 2) == 1.0);
  CHECK_THROWS_AS(ndcg_at_k(single({7, 9}, {7}), 3), ArgumentError);
}

TEST_CASE("ranking matches the full-sort oracle on random instances") {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 30; ++rep) {
    Matrix scores = oracle::random_dense(10, 15, rng);
    // Coarse rounding creates ties.
    scores = scores.unaryExpr([](double v) { return std::round(v * 2) / 2; });
    const auto train =
      SparseMatrix::from_dense(oracle::random_pattern(10, 15, 0.2, rng));
    Matrix t = oracle::random_pattern(10, 15, 0.2, rng);
    t = t.cwiseProduct(Matrix::Ones(10, 15) - train.to_dense());
    const auto test = SparseMatrix::from_dense(t);
    const RankingResult fast = rank_scores(scores, train, test, 8);
    const RankingResult ref = serial::rank_scores(scores, train, test, 8);
    CHECK(fast.users == ref.users);
    CHECK(fast.top == ref.top);
    for (std::size_t i = 0; i < fast.users.size(); ++i) {
      CHECK(fast.top[i] == oracle_top(scores, fast.users[i], train, 8));
    }
  }
}

TEST_CASE("metric properties") {
  std::mt19937_64 rng(62);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix scores = oracle::random_dense(12, 30, rng);
    const auto train =
      SparseMatrix::from_dense(oracle::random_pattern(12, 30, 0.1, rng));
    Matrix t = oracle::random_pattern(12, 30, 0.15, rng);
    t = t.cwiseProduct(Matrix::Ones(12, 30) - train.to_dense());
    const auto test = SparseMatrix::from_dense(t);
    const RankingResult r = rank_scores(scores, train, test, 20);
    double prev_recall = 0.0;
    double prev_ndcg = 0.0;
    for (Index k = 1; k <= 20; ++k) {
      const double rk = recall_at_k(r, k);
      const double nk = ndcg_at_k(r, k);
      CHECK(rk >= prev_recall);
      CHECK(rk >= 0.0);
      CHECK(rk <= 1.0);
      CHECK(nk >= 0.0);
      CHECK(nk <= 1.0 + 1e-15);
      prev_recall = rk;
      prev_ndcg = nk;
    }
    (void)prev_ndcg;
    // Strictly increasing transform keeps the ranking.
    const Matrix warped =
      scores.unaryExpr([](double v) { return std::exp(3 * v) - 7; });
    CHECK(rank_scores(warped, train, test, 20).top == r.top);
  }
}

TEST_CASE("recall nondecreasing and ndcg of an ideal ranking") {
  // Relevant items scored highest -> ndcg is 1 at every cutoff.
  Matrix scores(1, 6);
  scores << 0.1, 0.9, 0.2, 0.8, 0.3, 0.0;
  const auto test = SparseMatrix::from_pattern(1, 6, {{0, 1}, {0, 3}});
  const RankingResult r = rank_scores(scores, SparseMatrix(1, 6), test, 6);
  for (Index k = 1; k <= 6; ++k) {
    CHECK(ndcg_at_k(r, k) == doctest::Approx(1.0).epsilon(1e-15));
  }
  scores(0, 0) = 0.95;  // one miss ahead of the hits
  const RankingResult worse = rank_scores(scores, SparseMatrix(1, 6), test, 6);
  for (Index k = 1; k <= 6; ++k) {
    CHECK(ndcg_at_k(worse, k) < 1.0);
  }
}

TEST_CASE("embedding ranking and metric bundle") {
  std::mt19937_64 rng(63);
  const Matrix ef = oracle::random_dense(9, 3, rng);
  const PropagatedEmbeddings p{4, 5, ef, {}};
  const auto train = SparseMatrix::from_pattern(4, 5, {{0, 1}, {2, 2}});
  const auto test = SparseMatrix::from_pattern(4, 5, {{0, 0}, {2, 4}, {3, 1}});
  const RankingResult r = rank_all(p, train, test, 3);
  const Matrix scores = ef.topRows(4) * ef.bottomRows(5).transpose();
  CHECK(r.top == rank_scores(scores, train, test, 3).top);
  const MetricSet m = compute_metrics(rank_all(p, train, test, 20));
  CHECK(m.recall.size() == 3);
  CHECK(m.ndcg.count(20) == 1);
}

TEST_CASE("random baseline") {
  // 10 items, user 0 trained on 2 -> 8 candidates; user 1 on none -> 10.
  const auto train = SparseMatrix::from_pattern(3, 10, {{0, 0}, {0, 1}});
  const auto test = SparseMatrix::from_pattern(3, 10, {{0, 5}, {1, 2}});
  CHECK(random_recall_at_k(train, test, 5) ==
        doctest::Approx((5.0 / 8.0 + 5.0 / 10.0) / 2.0));
  CHECK(random_recall_at_k(train, test, 20) == 1.0);
}
