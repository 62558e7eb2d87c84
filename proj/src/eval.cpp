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

#include <ausrec/eval.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ausrec {
namespace {

void check_inputs(const Matrix& scores, const SparseMatrix& train,
                  const SparseMatrix& test, Index k_max) {
  if (k_max < 1) {
    throw ArgumentError("k_max must be >= 1");
  }
  if (train.rows() != scores.rows() || train.cols() != scores.cols() ||
      test.rows() != scores.rows() || test.cols() != scores.cols()) {
    throw StructuralError("rank: score matrix and interaction patterns differ "
                          "in shape");
  }
}

// Higher score first, then lower item index.
struct Better {
  const double* row;
  bool operator()(Index a, Index b) const {
    return row[a] != row[b] ? row[a] > row[b] : a < b;
  }
};

std::vector<Index> evaluated_users(const SparseMatrix& test) {
  std::vector<Index> users;
  for (Index u = 0; u < test.rows(); ++u) {
    if (test.row_nnz(u) > 0) {
      users.push_back(u);
    }
  }
  return users;
}

std::vector<Index> candidates_of(const SparseMatrix& train, Index u) {
  std::vector<Index> cand;
  cand.reserve(train.cols() - train.row_nnz(u));
  const auto masked = train.row_cols(u);
  auto it = masked.begin();
  for (Index v = 0; v < train.cols(); ++v) {
    if (it != masked.end() && *it == v) {
      ++it;
      continue;
    }
    cand.push_back(v);
  }
  return cand;
}

RankingResult init_result(const SparseMatrix& test, Index k_max) {
  RankingResult r;
  r.k_max = k_max;
  r.users = evaluated_users(test);
  r.top.resize(r.users.size());
  r.relevant.resize(r.users.size());
  for (std::size_t i = 0; i < r.users.size(); ++i) {
    const auto cols = test.row_cols(r.users[i]);
    r.relevant[i].assign(cols.begin(), cols.end());
  }
  return r;
}

void check_k(const RankingResult& r, Index k) {
  if (k < 1 || k > r.k_max) {
    throw ArgumentError("cutoff " + std::to_string(k) + " outside 1.." +
                        std::to_string(r.k_max));
  }
}

}  // namespace

RankingResult rank_scores(const Matrix& scores, const SparseMatrix& train,
                          const SparseMatrix& test, Index k_max) {
  check_inputs(scores, train, test, k_max);
  RankingResult r = init_result(test, k_max);
  const auto count = static_cast<Index>(r.users.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (Index i = 0; i < count; ++i) {
    const Index u = r.users[i];
    std::vector<Index> cand = candidates_of(train, u);
    const auto keep = std::min<Index>(k_max, static_cast<Index>(cand.size()));
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(),
                      Better{scores.row(u).data()});
    cand.resize(keep);
    r.top[i] = std::move(cand);
  }
  return r;
}

namespace serial {

RankingResult rank_scores(const Matrix& scores, const SparseMatrix& train,
                          const SparseMatrix& test, Index k_max) {
  check_inputs(scores, train, test, k_max);
  RankingResult r = init_result(test, k_max);
  for (std::size_t i = 0; i < r.users.size(); ++i) {
    const Index u = r.users[i];
    std::vector<std::pair<double, Index>> scored;
    for (Index v = 0; v < scores.cols(); ++v) {
      if (!train.contains(u, v)) {
        scored.emplace_back(-scores(u, v), v);
      }
    }
    std::sort(scored.begin(), scored.end());
    for (std::size_t k = 0; k < scored.size() && static_cast<Index>(k) < k_max;
         ++k) {
      r.top[i].push_back(scored[k].second);
    }
  }
  return r;
}

}  // namespace serial

RankingResult rank_all(const PropagatedEmbeddings& p, const SparseMatrix& train,
                       const SparseMatrix& test, Index k_max) {
  const Matrix scores = p.e_final.topRows(p.m) *
                        p.e_final.bottomRows(p.n).transpose();
  return rank_scores(scores, train, test, k_max);
}

double recall_at_k(const RankingResult& r, Index k) {
  check_k(r, k);
  if (r.users.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < r.users.size(); ++i) {
    const auto& rel = r.relevant[i];
    const auto& top = r.top[i];
    Index hits = 0;
    for (std::size_t pos = 0; pos < top.size() && static_cast<Index>(pos) < k;
         ++pos) {
      hits += std::binary_search(rel.begin(), rel.end(), top[pos]) ? 1 : 0;
    }
    total += static_cast<double>(hits) / static_cast<double>(rel.size());
  }
  return total / static_cast<double>(r.users.size());
}

double ndcg_at_k(const RankingResult& r, Index k) {
  check_k(r, k);
  if (r.users.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < r.users.size(); ++i) {
    const auto& rel = r.relevant[i];
    const auto& top = r.top[i];
    double dcg = 0.0;
    for (std::size_t pos = 0; pos < top.size() && static_cast<Index>(pos) < k;
         ++pos) {
      if (std::binary_search(rel.begin(), rel.end(), top[pos])) {
        dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
      }
    }
    double idcg = 0.0;
    const auto ideal = std::min<std::size_t>(k, rel.size());
    for (std::size_t pos = 0; pos < ideal; ++pos) {
      idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    }
    total += dcg / idcg;
  }
  return total / static_cast<double>(r.users.size());
}

MetricSet compute_metrics(const RankingResult& r) {
  MetricSet m;
  for (const Index k : kReportedCutoffs) {
    if (k <= r.k_max) {
      m.recall[k] = recall_at_k(r, k);
      m.ndcg[k] = ndcg_at_k(r, k);
    }
  }
  return m;
}

double random_recall_at_k(const SparseMatrix& train, const SparseMatrix& test,
                          Index k) {
  double total = 0.0;
  Index users = 0;
  for (Index u = 0; u < test.rows(); ++u) {
    if (test.row_nnz(u) == 0) {
      continue;
    }
    const Index candidates = train.cols() - train.row_nnz(u);
    // Each relevant item lands in the top k with probability k / candidates.
    total += std::min(1.0, static_cast<double>(k) /
                             static_cast<double>(candidates));
    ++users;
  }
  return users == 0 ? 0.0 : total / static_cast<double>(users);
}

}  // namespace ausrec
