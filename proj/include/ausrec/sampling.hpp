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

#include <ausrec/sparse.hpp>
#include <ausrec/tasks.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace ausrec {

using Edge = std::pair<Index, Index>;

// (anchor, positive, negative) triples. Primary batches hold item indices in
// positives/negatives, auxiliary batches hold user indices.
struct TripletBatch {
  std::optional<TaskKind> task;  // empty for the primary task
  std::vector<Index> anchors;
  std::vector<Index> positives;
  std::vector<Index> negatives;

  Index size() const { return static_cast<Index>(anchors.size()); }
  bool empty() const { return anchors.empty(); }
  bool is_primary() const { return !task.has_value(); }
  void push_back(Index a, Index p, Index n);
};

// Observed (anchor, candidate) pairs of one task, used for positive sampling
// and negative rejection.
class EdgeSet {
 public:
  // Primary task: anchors are users, candidates are the n items.
  static EdgeSet primary(Index m, Index n, std::vector<Edge> edges);
  // Auxiliary task: anchors and candidates are users; an anchor is never its
  // own negative.
  static EdgeSet auxiliary(const RelationSet& relation);

  const std::vector<Edge>& edges() const { return edges_; }
  const SparseMatrix& observed() const { return observed_; }
  Index candidates() const { return observed_.cols(); }
  bool excludes_self() const { return exclude_self_; }
  bool empty() const { return edges_.empty(); }
  // True when every candidate of the anchor is observed (or is the anchor).
  bool saturated(Index anchor) const;

 private:
  std::vector<Edge> edges_;
  SparseMatrix observed_;
  bool exclude_self_ = false;
};

// Uniform positives with replacement; one uniform negative per positive by
// rejection. A saturated anchor is resampled; after 100 consecutive failures
// the slot is skipped with a warning, so the batch can come out short.
TripletBatch sample_batch(const EdgeSet& edges, std::optional<TaskKind> task,
                          Index batch_size, std::mt19937_64& rng);

struct PrimarySplit {
  std::vector<Edge> train;  // D^{pri-train}
  std::vector<Edge> meta;   // D^{pri-meta}
  std::vector<Edge> test;

  // train + meta, sorted.
  std::vector<Edge> primary() const;
};

// Per-user random split into train/test at train_parts:test_parts, then a
// meta_fraction share of the training edges is held out as meta data. Users
// with fewer than two interactions keep everything in train.
PrimarySplit split_primary(const Dataset& d, int train_parts, int test_parts,
                           double meta_fraction, std::uint64_t seed);

SparseMatrix edges_to_matrix(Index rows, Index cols,
                             const std::vector<Edge>& edges);

}  // namespace ausrec
