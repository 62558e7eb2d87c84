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

#include <ausrec/sampling.hpp>

#include <ausrec/log.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace ausrec {

void TripletBatch::push_back(Index a, Index p, Index n) {
  anchors.push_back(a);
  positives.push_back(p);
  negatives.push_back(n);
}

SparseMatrix edges_to_matrix(Index rows, Index cols,
                             const std::vector<Edge>& edges) {
  return SparseMatrix::from_pattern(rows, cols, edges);
}

EdgeSet EdgeSet::primary(Index m, Index n, std::vector<Edge> edges) {
  EdgeSet set;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  set.observed_ = edges_to_matrix(m, n, edges);
  set.edges_ = std::move(edges);
  return set;
}

EdgeSet EdgeSet::auxiliary(const RelationSet& relation) {
  EdgeSet set;
  set.observed_ = relation.pairs;
  set.edges_ = relation.pairs.coordinates();
  set.exclude_self_ = true;
  return set;
}

bool EdgeSet::saturated(Index anchor) const {
  Index blocked = observed_.row_nnz(anchor);
  if (exclude_self_ && !observed_.contains(anchor, anchor)) {
    ++blocked;
  }
  return blocked >= candidates();
}

TripletBatch sample_batch(const EdgeSet& edges, std::optional<TaskKind> task,
                          Index batch_size, std::mt19937_64& rng) {
  if (edges.empty()) {
    throw ArgumentError("cannot sample from an empty edge set");
  }
  if (batch_size < 1) {
    throw ArgumentError("batch size must be >= 1");
  }
  constexpr int kMaxAnchorRetries = 100;
  std::uniform_int_distribution<std::size_t> pick_edge(
    0, edges.edges().size() - 1);
  std::uniform_int_distribution<Index> pick_candidate(0,
                                                      edges.candidates() - 1);
  TripletBatch batch;
  batch.task = task;
  batch.anchors.reserve(batch_size);
  batch.positives.reserve(batch_size);
  batch.negatives.reserve(batch_size);
  Index skipped = 0;
  for (Index i = 0; i < batch_size; ++i) {
    int failures = 0;
    const Edge* edge = nullptr;
    while (failures < kMaxAnchorRetries) {
      edge = &edges.edges()[pick_edge(rng)];
      if (!edges.saturated(edge->first)) {
        break;
      }
      ++failures;
      edge = nullptr;
    }
    if (edge == nullptr) {
      ++skipped;
      continue;
    }
    Index neg = 0;
    do {
      neg = pick_candidate(rng);
    } while ((edges.excludes_self() && neg == edge->first) ||
             edges.observed().contains(edge->first, neg));
    batch.push_back(edge->first, edge->second, neg);
  }
  if (skipped > 0) {
    log::warn("sample_batch: skipped " + std::to_string(skipped) +
              " slots whose anchors observe every candidate");
  }
  return batch;
}

std::vector<Edge> PrimarySplit::primary() const {
  std::vector<Edge> all = train;
  all.insert(all.end(), meta.begin(), meta.end());
  std::sort(all.begin(), all.end());
  return all;
}

PrimarySplit split_primary(const Dataset& d, int train_parts, int test_parts,
                           double meta_fraction, std::uint64_t seed) {
  if (train_parts < 1 || test_parts < 1) {
    throw ArgumentError("split ratio parts must be >= 1");
  }
  if (!(meta_fraction > 0.0 && meta_fraction < 0.5)) {
    throw ArgumentError("meta fraction must lie in (0, 0.5)");
  }
  std::mt19937_64 rng(seed);
  const double test_share =
    static_cast<double>(test_parts) / static_cast<double>(train_parts + test_parts);
  PrimarySplit split;
  Index sparse_users = 0;
  for (Index u = 0; u < d.m; ++u) {
    const auto cols = d.R.row_cols(u);
    std::vector<Index> items(cols.begin(), cols.end());
    if (items.size() < 2) {
      if (!items.empty()) {
        ++sparse_users;
      }
      for (const Index v : items) {
        split.train.emplace_back(u, v);
      }
      continue;
    }
    std::shuffle(items.begin(), items.end(), rng);
    const auto k = static_cast<double>(items.size());
    const auto n_test =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(k * test_share)));
    for (std::size_t i = 0; i < items.size(); ++i) {
      (i < n_test ? split.test : split.train).emplace_back(u, items[i]);
    }
  }
  if (sparse_users > 0) {
    log::warn(std::to_string(sparse_users) +
              " users have fewer than 2 interactions; all their edges stay in "
              "train");
  }
  std::sort(split.train.begin(), split.train.end());
  std::shuffle(split.train.begin(), split.train.end(), rng);
  const auto n_meta = static_cast<std::size_t>(
    std::llround(meta_fraction * static_cast<double>(split.train.size())));
  split.meta.assign(split.train.begin(), split.train.begin() + n_meta);
  split.train.erase(split.train.begin(), split.train.begin() + n_meta);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.meta.begin(), split.meta.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace ausrec
