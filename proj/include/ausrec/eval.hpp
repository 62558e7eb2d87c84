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

#pragma once

#include <ausrec/encoder.hpp>
#include <ausrec/sparse.hpp>

#include <map>
#include <utility>
#include <vector>

namespace ausrec {

// Top-k lists for every user with at least one held-out item.
struct RankingResult {
  Index k_max = 0;
  std::vector<Index> users;
  std::vector<std::vector<Index>> top;       // best first
  std::vector<std::vector<Index>> relevant;  // sorted held-out items
};

// Scores every item for every evaluated user, masks the user's training
// items, and keeps the k_max best with ties broken by ascending item index.
// train and test are m x n interaction patterns.
RankingResult rank_all(const PropagatedEmbeddings& p, const SparseMatrix& train,
                       const SparseMatrix& test, Index k_max);

// Same ranking from an explicit score matrix (users x items).
RankingResult rank_scores(const Matrix& scores, const SparseMatrix& train,
                          const SparseMatrix& test, Index k_max);

namespace serial {
// Reference: full sort per user, single thread.
RankingResult rank_scores(const Matrix& scores, const SparseMatrix& train,
                          const SparseMatrix& test, Index k_max);
}  // namespace serial

double recall_at_k(const RankingResult& r, Index k);
double ndcg_at_k(const RankingResult& r, Index k);

// Recall and NDCG at 5, 10 and 20.
struct MetricSet {
  std::map<Index, double> recall;
  std::map<Index, double> ndcg;
};

inline constexpr Index kReportedCutoffs[] = {5, 10, 20};

MetricSet compute_metrics(const RankingResult& r);

// E[Recall@k] of a uniformly random ranking over each user's candidates.
double random_recall_at_k(const SparseMatrix& train, const SparseMatrix& test,
                          Index k);

}  // namespace ausrec
