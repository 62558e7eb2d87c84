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

// Compute kernels behind the sparse graph algebra. Each kernel has a plain
// serial reference and an OpenMP version; the parallel versions are what the
// library uses, the serial ones are kept for testing and benchmarking. Both
// produce bit-identical results for any thread count.

#include <ausrec/sparse.hpp>

namespace ausrec::kernels {

namespace serial {

Matrix spmm(const SparseMatrix& a, const Matrix& x);
SparseMatrix bool_product(const SparseMatrix& a, const SparseMatrix& b);
// Exact-distance pairs via repeated boolean expansion of the reachability
// frontier.
SparseMatrix exact_k_hop(const SparseMatrix& s, int k);

}  // namespace serial

namespace parallel {

Matrix spmm(const SparseMatrix& a, const Matrix& x);
SparseMatrix bool_product(const SparseMatrix& a, const SparseMatrix& b);
// Depth-limited BFS from every source, sources spread over threads.
SparseMatrix exact_k_hop(const SparseMatrix& s, int k);

}  // namespace parallel

// Applies AUSREC_THREADS (if set) to the OpenMP runtime. Returns the number
// of threads in effect.
int configure_threads_from_env();

// Keeps large freed blocks in the heap instead of returning them to the OS.
// Training allocates and drops many multi-megabyte temporaries per step;
// without this the page-fault cost rivals the arithmetic. No-op off glibc.
void retain_freed_memory();

}  // namespace ausrec::kernels
