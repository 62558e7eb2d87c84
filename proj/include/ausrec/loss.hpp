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

// Pairwise BPR loss, per sample:
//   -ln sigmoid(y_pos - y_neg) + delta * (|w_a|^2 + |w_p|^2 + |w_n|^2)
// where y are inner products of propagated embeddings and w are the layer-0
// rows of the three nodes involved.

#include <ausrec/autodiff.hpp>
#include <ausrec/encoder.hpp>
#include <ausrec/sampling.hpp>

namespace ausrec {

// Embedding-table row of each batch column (items are offset by m).
struct BatchNodes {
  std::vector<Index> anchors;
  std::vector<Index> positives;
  std::vector<Index> negatives;
};

BatchNodes batch_nodes(const TripletBatch& b, Index m);

struct BprLoss {
  Vector per_sample;
  double mean = 0.0;  // 0 for an empty batch
};

BprLoss bpr_loss(const PropagatedEmbeddings& p, const Matrix& e0,
                 const TripletBatch& b, double delta);

// Adds d/dE_final and d/dE0 of sum_i coef[i] * loss_i into the two
// accumulators (both (m+n) x d).
void bpr_backward(const PropagatedEmbeddings& p, const Matrix& e0,
                  const TripletBatch& b, double delta, const Vector& coef,
                  Matrix& grad_final, Matrix& grad_e0);

// Directional derivative of every per-sample loss along a direction h of E0,
// given e_dot = propagate_mean(h).
Vector bpr_directional(const PropagatedEmbeddings& p, const Matrix& e0,
                       const Matrix& e_dot, const Matrix& h,
                       const TripletBatch& b, double delta);

// Recorded per-sample losses as an N x 1 column.
ad::Tracked bpr_loss(const ad::Tracked& e_final, const ad::Tracked& e0,
                     const TripletBatch& b, Index m, double delta);

}  // namespace ausrec
