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

#include <ausrec/sparse.hpp>

#include <ausrec/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace ausrec {

SparseMatrix::SparseMatrix(Index rows, Index cols)
  : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
  if (rows < 0 || cols < 0) {
    throw StructuralError("negative matrix dimension");
  }
}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr,
                           std::vector<Index> col_idx,
                           std::vector<double> values)
  : rows_(rows),
    cols_(cols),
    row_ptr_(std::move(row_ptr)),
    col_idx_(std::move(col_idx)),
    values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (rows_ < 0 || cols_ < 0) {
    throw StructuralError("negative matrix dimension");
  }
  if (static_cast<Index>(row_ptr_.size()) != rows_ + 1 || row_ptr_[0] != 0 ||
      row_ptr_.back() != nnz() || values_.size() != col_idx_.size()) {
    throw StructuralError("inconsistent CSR arrays");
  }
  for (Index r = 0; r < rows_; ++r) {
    if (row_ptr_[r + 1] < row_ptr_[r]) {
      throw StructuralError("row_ptr must be nondecreasing");
    }
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const Index c = col_idx_[p];
      if (c < 0 || c >= cols_) {
        throw StructuralError("column index out of range in row " +
                              std::to_string(r));
      }
      if (p > row_ptr_[r] && col_idx_[p - 1] >= c) {
        throw StructuralError("column indices not strictly increasing in row " +
                              std::to_string(r));
      }
      if (!std::isfinite(values_[p]) || values_[p] == 0.0) {
        throw StructuralError("stored values must be finite and nonzero");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw StructuralError("triplet (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ") outside " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  std::vector<Index> row_ptr(rows + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const Index r = triplets[i].row;
    const Index c = triplets[i].col;
    double v = 0.0;
    for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c;
         ++i) {
      v += triplets[i].value;
    }
    if (v != 0.0) {
      col_idx.push_back(c);
      values.push_back(v);
      ++row_ptr[r + 1];
    }
  }
  for (Index r = 0; r < rows; ++r) {
    row_ptr[r + 1] += row_ptr[r];
  }
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::from_pattern(
  Index rows, Index cols, std::vector<std::pair<Index, Index>> coords) {
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  std::vector<Triplet> triplets;
  triplets.reserve(coords.size());
  for (const auto& [r, c] : coords) {
    triplets.push_back({r, c, 1.0});
  }
  return from_triplets(rows, cols, std::move(triplets));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> row_ptr(n + 1);
  std::vector<Index> col_idx(n);
  for (Index i = 0; i <= n; ++i) {
    row_ptr[i] = i;
  }
  for (Index i = 0; i < n; ++i) {
    col_idx[i] = i;
  }
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx),
                      std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
  std::vector<Triplet> triplets;
  for (Index r = 0; r < dense.rows(); ++r) {
    for (Index c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) {
        triplets.push_back({r, c, dense(r, c)});
      }
    }
  }
  return from_triplets(dense.rows(), dense.cols(), std::move(triplets));
}

std::span<const Index> SparseMatrix::row_cols(Index r) const {
  return {col_idx_.data() + row_ptr_[r],
          static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
}

std::span<const double> SparseMatrix::row_values(Index r) const {
  return {values_.data() + row_ptr_[r],
          static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
}

bool SparseMatrix::contains(Index r, Index c) const {
  if (r < 0 || r >= rows_) {
    return false;
  }
  const auto cols = row_cols(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

double SparseMatrix::at(Index r, Index c) const {
  if (r < 0 || r >= rows_) {
    return 0.0;
  }
  const auto cols = row_cols(r);
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) {
    return 0.0;
  }
  return values_[row_ptr_[r] + (it - cols.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Index> row_ptr(cols_ + 1, 0);
  for (const Index c : col_idx_) {
    ++row_ptr[c + 1];
  }
  for (Index c = 0; c < cols_; ++c) {
    row_ptr[c + 1] += row_ptr[c];
  }
  std::vector<Index> fill(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> col_idx(nnz());
  std::vector<double> values(nnz());
  // Rows are visited in ascending order, so each output row comes out sorted.
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const Index slot = fill[col_idx_[p]]++;
      col_idx[slot] = r;
      values[slot] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::binarized() const {
  return SparseMatrix(rows_, cols_, row_ptr_, col_idx_,
                      std::vector<double>(values_.size(), 1.0));
}

SparseMatrix SparseMatrix::without_diagonal() const {
  std::vector<Index> row_ptr(rows_ + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(col_idx_.size());
  values.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      if (col_idx_[p] != r) {
        col_idx.push_back(col_idx_[p]);
        values.push_back(values_[p]);
      }
    }
    row_ptr[r + 1] = static_cast<Index>(col_idx.size());
  }
  return SparseMatrix(rows_, cols_, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::block(Index r0, Index c0, Index nr,
                                 Index nc) const {
  if (r0 < 0 || c0 < 0 || nr < 0 || nc < 0 || r0 + nr > rows_ ||
      c0 + nc > cols_) {
    throw StructuralError("block outside matrix bounds");
  }
  std::vector<Index> row_ptr(nr + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  for (Index r = 0; r < nr; ++r) {
    const auto cols = row_cols(r0 + r);
    const auto vals = row_values(r0 + r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] >= c0 && cols[k] < c0 + nc) {
        col_idx.push_back(cols[k] - c0);
        values.push_back(vals[k]);
      }
    }
    row_ptr[r + 1] = static_cast<Index>(col_idx.size());
  }
  return SparseMatrix(nr, nc, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

bool SparseMatrix::is_symmetric() const {
  return rows_ == cols_ && transpose() == *this;
}

bool SparseMatrix::has_zero_diagonal() const {
  for (Index r = 0; r < std::min(rows_, cols_); ++r) {
    if (contains(r, r)) {
      return false;
    }
  }
  return true;
}

Matrix SparseMatrix::to_dense() const {
  Matrix dense = Matrix::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      dense(r, col_idx_[p]) = values_[p];
    }
  }
  return dense;
}

std::vector<std::pair<Index, Index>> SparseMatrix::coordinates() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(col_idx_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (const Index c : row_cols(r)) {
      out.emplace_back(r, c);
    }
  }
  return out;
}

void Dataset::validate() const {
  if (m < 1 || n < 1) {
    throw StructuralError("dataset needs at least one user and one item");
  }
  if (R.rows() != m || R.cols() != n) {
    throw StructuralError("R is " + std::to_string(R.rows()) + "x" +
                          std::to_string(R.cols()) + ", expected " +
                          std::to_string(m) + "x" + std::to_string(n));
  }
  if (S.rows() != m || S.cols() != m) {
    throw StructuralError("S is " + std::to_string(S.rows()) + "x" +
                          std::to_string(S.cols()) + ", expected " +
                          std::to_string(m) + "x" + std::to_string(m));
  }
  if (!S.is_symmetric()) {
    throw StructuralError("S must be symmetric");
  }
  if (!S.has_zero_diagonal()) {
    throw StructuralError("S must have a zero diagonal");
  }
  const auto all_ones = [](const SparseMatrix& x) {
    return std::all_of(x.values().begin(), x.values().end(),
                       [](double v) { return v == 1.0; });
  };
  if (!all_ones(R) || !all_ones(S)) {
    throw StructuralError("R and S must be binary");
  }
}

SparseMatrix build_joint_adjacency(const Dataset& d) {
  d.validate();
  const Index m = d.m;
  const Index size = d.m + d.n;
  const SparseMatrix rt = d.R.transpose();
  std::vector<Index> row_ptr(size + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(d.S.nnz() + 2 * d.R.nnz());
  values.reserve(col_idx.capacity());
  for (Index u = 0; u < m; ++u) {
    // S block columns (< m) precede R block columns (>= m): row stays sorted.
    for (const Index c : d.S.row_cols(u)) {
      col_idx.push_back(c);
    }
    for (const Index c : d.R.row_cols(u)) {
      col_idx.push_back(m + c);
    }
    row_ptr[u + 1] = static_cast<Index>(col_idx.size());
  }
  for (Index v = 0; v < d.n; ++v) {
    for (const Index c : rt.row_cols(v)) {
      col_idx.push_back(c);
    }
    row_ptr[m + v + 1] = static_cast<Index>(col_idx.size());
  }
  values.assign(col_idx.size(), 1.0);
  return SparseMatrix(size, size, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix sym_normalize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw StructuralError("sym_normalize needs a square matrix");
  }
  std::vector<double> inv_sqrt(a.rows(), 0.0);
  for (Index r = 0; r < a.rows(); ++r) {
    double deg = 0.0;
    for (const double v : a.row_values(r)) {
      deg += v;
    }
    inv_sqrt[r] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  std::vector<double> values(a.values().size());
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      values[p] = inv_sqrt[r] * a.values()[p] * inv_sqrt[a.col_idx()[p]];
    }
  }
  // A stored entry of a zero-degree row can only arise from cancelling
  // weights; those become explicit zeros, which CSR cannot hold.
  std::vector<Triplet> triplets;
  triplets.reserve(values.size());
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      if (values[p] != 0.0) {
        triplets.push_back({r, a.col_idx()[p], values[p]});
      }
    }
  }
  if (static_cast<Index>(triplets.size()) == a.nnz()) {
    return SparseMatrix(a.rows(), a.cols(), a.row_ptr(), a.col_idx(),
                        std::move(values));
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(triplets));
}

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
  return kernels::parallel::spmm(a, x);
}

SparseMatrix bool_product(const SparseMatrix& a, const SparseMatrix& b) {
  return kernels::parallel::bool_product(a, b);
}

SparseMatrix hadamard_mask(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw StructuralError("hadamard_mask operands differ in shape");
  }
  std::vector<Index> row_ptr(a.rows() + 1, 0);
  std::vector<Index> col_idx;
  for (Index r = 0; r < a.rows(); ++r) {
    const auto ca = a.row_cols(r);
    const auto cb = b.row_cols(r);
    std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                          std::back_inserter(col_idx));
    row_ptr[r + 1] = static_cast<Index>(col_idx.size());
  }
  std::vector<double> values(col_idx.size(), 1.0);
  return SparseMatrix(a.rows(), a.cols(), std::move(row_ptr),
                      std::move(col_idx), std::move(values));
}

SparseMatrix exact_k_hop(const SparseMatrix& s, int k) {
  return kernels::parallel::exact_k_hop(s, k);
}

}  // namespace ausrec
