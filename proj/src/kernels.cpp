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

#include <ausrec/kernels.hpp>
#include <ausrec/log.hpp>

#include <omp.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <iterator>
#include <string>

namespace ausrec::kernels {
namespace {

void check_spmm_shapes(const SparseMatrix& a, const Matrix& x) {
  if (a.cols() != x.rows()) {
    throw StructuralError("spmm: A is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " but X has " +
                          std::to_string(x.rows()) + " rows");
  }
}

void check_product_shapes(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw StructuralError("bool_product: inner dimensions differ (" +
                          std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + ")");
  }
}

void check_hop_args(const SparseMatrix& s, int k) {
  if (k < 1) {
    throw ArgumentError("exact_k_hop: k must be >= 1, got " +
                        std::to_string(k));
  }
  if (s.rows() != s.cols()) {
    throw StructuralError("exact_k_hop: graph matrix must be square");
  }
}

SparseMatrix assemble_rows(Index rows, Index cols,
                           std::vector<std::vector<Index>>& per_row) {
  std::vector<Index> row_ptr(rows + 1, 0);
  for (Index r = 0; r < rows; ++r) {
    row_ptr[r + 1] = row_ptr[r] + static_cast<Index>(per_row[r].size());
  }
  std::vector<Index> col_idx;
  col_idx.reserve(row_ptr.back());
  for (auto& row : per_row) {
    col_idx.insert(col_idx.end(), row.begin(), row.end());
    std::vector<Index>().swap(row);
  }
  std::vector<double> values(col_idx.size(), 1.0);
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix pattern_union(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<std::vector<Index>> rows(a.rows());
  for (Index r = 0; r < a.rows(); ++r) {
    const auto ca = a.row_cols(r);
    const auto cb = b.row_cols(r);
    std::set_union(ca.begin(), ca.end(), cb.begin(), cb.end(),
                   std::back_inserter(rows[r]));
  }
  return assemble_rows(a.rows(), a.cols(), rows);
}

SparseMatrix pattern_difference(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<std::vector<Index>> rows(a.rows());
  for (Index r = 0; r < a.rows(); ++r) {
    const auto ca = a.row_cols(r);
    const auto cb = b.row_cols(r);
    std::set_difference(ca.begin(), ca.end(), cb.begin(), cb.end(),
                        std::back_inserter(rows[r]));
  }
  return assemble_rows(a.rows(), a.cols(), rows);
}

}  // namespace

namespace serial {

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
  check_spmm_shapes(a, x);
  Matrix out = Matrix::Zero(a.rows(), x.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const Index c = a.col_idx()[p];
      const double v = a.values()[p];
      for (Index j = 0; j < x.cols(); ++j) {
        out(r, j) += v * x(c, j);
      }
    }
  }
  return out;
}

SparseMatrix bool_product(const SparseMatrix& a, const SparseMatrix& b) {
  check_product_shapes(a, b);
  std::vector<std::vector<Index>> rows(a.rows());
  for (Index r = 0; r < a.rows(); ++r) {
    auto& row = rows[r];
    for (const Index k : a.row_cols(r)) {
      const auto bk = b.row_cols(k);
      row.insert(row.end(), bk.begin(), bk.end());
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return assemble_rows(a.rows(), b.cols(), rows);
}

SparseMatrix exact_k_hop(const SparseMatrix& s, int k) {
  check_hop_args(s, k);
  const SparseMatrix adj = s.binarized();
  SparseMatrix within = SparseMatrix::identity(s.rows());
  SparseMatrix previous = within;
  for (int step = 1; step <= k; ++step) {
    previous = within;
    within = pattern_union(within, serial::bool_product(within, adj));
    if (within == previous) {
      return SparseMatrix(s.rows(), s.cols());
    }
  }
  return pattern_difference(within, previous);
}

}  // namespace serial

namespace parallel {

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
  check_spmm_shapes(a, x);
  Matrix out(a.rows(), x.cols());
  const Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    auto dst = out.row(r);
    dst.setZero();
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      dst.noalias() += a.values()[p] * x.row(a.col_idx()[p]);
    }
  }
  return out;
}

SparseMatrix bool_product(const SparseMatrix& a, const SparseMatrix& b) {
  check_product_shapes(a, b);
  const Index rows = a.rows();
  const Index cols = b.cols();
  std::vector<std::vector<Index>> per_row(rows);
#pragma omp parallel
  {
    std::vector<char> mark(cols, 0);
#pragma omp for schedule(dynamic, 64)
    for (Index r = 0; r < rows; ++r) {
      auto& row = per_row[r];
      for (const Index k : a.row_cols(r)) {
        for (const Index c : b.row_cols(k)) {
          if (!mark[c]) {
            mark[c] = 1;
            row.push_back(c);
          }
        }
      }
      for (const Index c : row) {
        mark[c] = 0;
      }
      std::sort(row.begin(), row.end());
    }
  }
  return assemble_rows(rows, cols, per_row);
}

SparseMatrix exact_k_hop(const SparseMatrix& s, int k) {
  check_hop_args(s, k);
  const Index n = s.rows();
  std::vector<std::vector<Index>> per_row(n);
#pragma omp parallel
  {
    std::vector<int> dist(n, -1);
    std::vector<Index> visited;
    std::vector<Index> frontier;
    std::vector<Index> next;
#pragma omp for schedule(dynamic, 32)
    for (Index src = 0; src < n; ++src) {
      dist[src] = 0;
      visited.assign(1, src);
      frontier.assign(1, src);
      for (int depth = 1; depth <= k && !frontier.empty(); ++depth) {
        next.clear();
        for (const Index u : frontier) {
          for (const Index v : s.row_cols(u)) {
            if (dist[v] < 0) {
              dist[v] = depth;
              visited.push_back(v);
              next.push_back(v);
            }
          }
        }
        frontier.swap(next);
      }
      auto& row = per_row[src];
      for (const Index v : frontier) {
        row.push_back(v);
      }
      std::sort(row.begin(), row.end());
      for (const Index v : visited) {
        dist[v] = -1;
      }
    }
  }
  return assemble_rows(n, n, per_row);
}

}  // namespace parallel

int configure_threads_from_env() {
  if (const char* env = std::getenv("AUSREC_THREADS")) {
    int threads = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), threads);
    if (ec == std::errc() && *ptr == '\0' && threads >= 1) {
      omp_set_num_threads(threads);
    } else {
      log::warn(std::string("ignoring AUSREC_THREADS='") + env +
                "'; expected a positive integer");
    }
  }
  return omp_get_max_threads();
}

void retain_freed_memory() {
#if defined(__GLIBC__)
  constexpr int kLimit = 1 << 30;
  mallopt(M_MMAP_THRESHOLD, kLimit);
  mallopt(M_TRIM_THRESHOLD, kLimit);
#endif
}

}  // namespace ausrec::kernels
