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

#include <ausrec/common.hpp>

#include <span>
#include <utility>
#include <vector>

namespace ausrec {

struct Triplet {
  Index row;
  Index col;
  double value = 1.0;
};

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row and every stored value is finite and nonzero. Immutable once built.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  // Empty (all-zero) matrix of the given shape.
  SparseMatrix(Index rows, Index cols);
  // Takes ownership of CSR arrays; throws StructuralError if they violate the
  // class invariants.
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr,
               std::vector<Index> col_idx, std::vector<double> values);

  // Duplicate coordinates are summed; entries that end up zero are dropped.
  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::vector<Triplet> triplets);
  // Binary matrix with a 1 at every listed coordinate (duplicates collapse).
  static SparseMatrix from_pattern(Index rows, Index cols,
                                   std::vector<std::pair<Index, Index>> coords);
  static SparseMatrix identity(Index n);
  static SparseMatrix from_dense(const Matrix& dense);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(col_idx_.size()); }

  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const Index> row_cols(Index r) const;
  std::span<const double> row_values(Index r) const;
  Index row_nnz(Index r) const { return row_ptr_[r + 1] - row_ptr_[r]; }

  bool contains(Index r, Index c) const;
  // Stored value at (r, c), or 0.
  double at(Index r, Index c) const;

  SparseMatrix transpose() const;
  // Same pattern with every value replaced by 1.
  SparseMatrix binarized() const;
  SparseMatrix without_diagonal() const;
  // Copy of the block [r0, r0+nr) x [c0, c0+nc).
  SparseMatrix block(Index r0, Index c0, Index nr, Index nc) const;
  bool is_symmetric() const;
  bool has_zero_diagonal() const;
  Matrix to_dense() const;
  std::vector<std::pair<Index, Index>> coordinates() const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
           a.row_ptr_ == b.row_ptr_ && a.col_idx_ == b.col_idx_ &&
           a.values_ == b.values_;
  }

 private:
  void validate() const;

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

// User-item interactions R (m x n) and the social graph S (m x m).
struct Dataset {
  Index m = 0;
  Index n = 0;
  SparseMatrix R;
  SparseMatrix S;

  // Throws StructuralError unless shapes match m/n, S is symmetric with a zero
  // diagonal and every stored entry of R and S equals 1.
  void validate() const;
};

// A = [[S, R], [R^T, 0]] with users at 0..m-1 and items at m..m+n-1.
SparseMatrix build_joint_adjacency(const Dataset& d);

// D^{-1/2} A D^{-1/2} with D the row sums of A; zero-degree rows stay zero.
SparseMatrix sym_normalize(const SparseMatrix& a);

// Sparse times dense.
Matrix spmm(const SparseMatrix& a, const Matrix& x);

// Boolean product: (i, j) is set iff some k has a(i,k) != 0 and b(k,j) != 0.
SparseMatrix bool_product(const SparseMatrix& a, const SparseMatrix& b);

// Entries present in both a and b, with value 1.
SparseMatrix hadamard_mask(const SparseMatrix& a, const SparseMatrix& b);

// Pairs whose shortest-path distance in the undirected graph s is exactly k.
SparseMatrix exact_k_hop(const SparseMatrix& s, int k);

}  // namespace ausrec
