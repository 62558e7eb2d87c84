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

#include <ausrec/autodiff.hpp>
#include <ausrec/sparse.hpp>

#include <memory>
#include <random>
#include <vector>

namespace ausrec {

// Trainable layer-0 embeddings: users in rows 0..m-1, items in m..m+n-1.
struct EmbeddingTable {
  Index m = 0;
  Index n = 0;
  int layers = 3;
  Matrix e0;

  Index dim() const { return e0.cols(); }

  // Entries drawn from N(0, stddev^2).
  static EmbeddingTable random(Index m, Index n, Index dim, int layers,
                               std::mt19937_64& rng, double stddev = 0.01);
};

struct PropagatedEmbeddings {
  Index m = 0;
  Index n = 0;
  Matrix e_final;
  // Layers 0..K when requested.
  std::vector<Matrix> per_layer;

  auto user(Index u) const { return e_final.row(u); }
  auto item(Index v) const { return e_final.row(m + v); }
};

// Mean of A^k X over k = 0..layers. Linear in X; with a symmetric A it is
// also its own adjoint.
Matrix propagate_mean(const SparseMatrix& a_hat, const Matrix& x, int layers);

// Throws NumericalError naming the first layer that goes non-finite.
PropagatedEmbeddings propagate(const SparseMatrix& a_hat,
                               const EmbeddingTable& emb,
                               bool keep_layers = false);

// Recorded variant; gradients flow back to e0.
ad::Tracked propagate(std::shared_ptr<const SparseMatrix> a_hat,
                      const ad::Tracked& e0, int layers);

double score_user_item(const PropagatedEmbeddings& p, Index u, Index v);
double score_user_user(const PropagatedEmbeddings& p, Index u, Index u2);

}  // namespace ausrec
