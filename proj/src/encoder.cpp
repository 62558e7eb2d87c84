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

#include <ausrec/encoder.hpp>

#include <string>

namespace ausrec {

EmbeddingTable EmbeddingTable::random(Index m, Index n, Index dim, int layers,
                                      std::mt19937_64& rng, double stddev) {
  if (m < 1 || n < 1 || dim < 1) {
    throw ArgumentError("embedding table needs m, n, dim >= 1");
  }
  if (layers < 1) {
    throw ArgumentError("propagation depth must be >= 1");
  }
  std::normal_distribution<double> normal(0.0, stddev);
  EmbeddingTable t{m, n, layers, Matrix(m + n, dim)};
  for (Index r = 0; r < t.e0.rows(); ++r) {
    for (Index c = 0; c < dim; ++c) {
      t.e0(r, c) = normal(rng);
    }
  }
  return t;
}

namespace {

void check_layer(const Matrix& layer, int k) {
  if (!layer.allFinite()) {
    throw NumericalError("propagation diverged: layer " + std::to_string(k) +
                         " has non-finite values");
  }
}

}  // namespace

Matrix propagate_mean(const SparseMatrix& a_hat, const Matrix& x,
                      int layers) {
  if (a_hat.rows() != a_hat.cols() || a_hat.cols() != x.rows()) {
    throw StructuralError("propagate: adjacency does not match embeddings");
  }
  Matrix acc = x;
  Matrix layer = x;
  for (int k = 1; k <= layers; ++k) {
    layer = spmm(a_hat, layer);
    acc += layer;
  }
  acc /= static_cast<double>(layers + 1);
  return acc;
}

PropagatedEmbeddings propagate(const SparseMatrix& a_hat,
                               const EmbeddingTable& emb, bool keep_layers) {
  if (a_hat.rows() != emb.m + emb.n || a_hat.cols() != emb.m + emb.n) {
    throw StructuralError("propagate: adjacency is " +
                          std::to_string(a_hat.rows()) + "x" +
                          std::to_string(a_hat.cols()) + ", embeddings have " +
                          std::to_string(emb.m + emb.n) + " rows");
  }
  if (emb.layers < 1) {
    throw ArgumentError("propagation depth must be >= 1");
  }
  PropagatedEmbeddings out{emb.m, emb.n, emb.e0, {}};
  check_layer(emb.e0, 0);
  if (keep_layers) {
    out.per_layer.push_back(emb.e0);
  }
  Matrix layer = emb.e0;
  for (int k = 1; k <= emb.layers; ++k) {
    layer = spmm(a_hat, layer);
    check_layer(layer, k);
    out.e_final += layer;
    if (keep_layers) {
      out.per_layer.push_back(layer);
    }
  }
  out.e_final /= static_cast<double>(emb.layers + 1);
  return out;
}

ad::Tracked propagate(std::shared_ptr<const SparseMatrix> a_hat,
                      const ad::Tracked& e0, int layers) {
  if (layers < 1) {
    throw ArgumentError("propagation depth must be >= 1");
  }
  ad::Tracked acc = e0;
  ad::Tracked layer = e0;
  for (int k = 1; k <= layers; ++k) {
    layer = ad::spmm(a_hat, layer);
    acc = ad::add(acc, layer);
  }
  return ad::scale(acc, 1.0 / static_cast<double>(layers + 1));
}

double score_user_item(const PropagatedEmbeddings& p, Index u, Index v) {
  if (u < 0 || u >= p.m) {
    throw ArgumentError("user index " + std::to_string(u) + " out of range");
  }
  if (v < 0 || v >= p.n) {
    throw ArgumentError("item index " + std::to_string(v) + " out of range");
  }
  return p.user(u).dot(p.item(v));
}

double score_user_user(const PropagatedEmbeddings& p, Index u, Index u2) {
  if (u < 0 || u >= p.m || u2 < 0 || u2 >= p.m) {
    throw ArgumentError("user-user score needs two user indices < " +
                        std::to_string(p.m));
  }
  return p.user(u).dot(p.user(u2));
}

}  // namespace ausrec
