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

// The OpenMP kernels must match the serial references exactly, whatever the
// thread count.

#include "oracles.hpp"

#include <ausrec/kernels.hpp>
#include <ausrec/log.hpp>
#include <ausrec/synthetic.hpp>

#include <doctest.h>
#include <omp.h>

#include <cstdlib>

using namespace ausrec;

namespace {

struct ThreadGuard {
  explicit ThreadGuard(int n) : previous(omp_get_max_threads()) {
    omp_set_num_threads(n);
  }
  ~ThreadGuard() { omp_set_num_threads(previous); }
  int previous;
};

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial references") {
  const Dataset d = synthetic::random_dataset(150, 200, 0.03, 0.04, 9);
  const SparseMatrix rt = d.R.transpose();
  std::mt19937_64 rng(1);
  const SparseMatrix a = sym_normalize(build_joint_adjacency(d));
  const Matrix x = oracle::random_dense(a.cols(), 16, rng);
  for (const int threads : {1, 2, 3, 8}) {
    ThreadGuard guard(threads);
    CHECK(kernels::parallel::spmm(a, x) == kernels::serial::spmm(a, x));
    CHECK(kernels::parallel::bool_product(d.R, rt) ==
          kernels::serial::bool_product(d.R, rt));
    for (int k = 1; k <= 3; ++k) {
      CHECK(kernels::parallel::exact_k_hop(d.S, k) ==
            kernels::serial::exact_k_hop(d.S, k));
    }
  }
}

TEST_CASE("serial k-hop matches shortest paths on disconnected graphs") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix g = oracle::random_graph(15, 0.08, rng);
    const auto s = SparseMatrix::from_dense(g);
    for (int k = 1; k <= 5; ++k) {
      CHECK(kernels::serial::exact_k_hop(s, k).to_dense() ==
            oracle::exact_hop(g, k));
    }
  }
}

TEST_CASE("thread count comes from the environment") {
  ::setenv("AUSREC_THREADS", "2", 1);
  CHECK(kernels::configure_threads_from_env() == 2);
  ::setenv("AUSREC_THREADS", "1", 1);
  CHECK(kernels::configure_threads_from_env() == 1);
  int warnings = 0;
  log::ScopedSink sink([&](log::Level level, const std::string&) {
    warnings += level == log::Level::Warning;
  });
  ::setenv("AUSREC_THREADS", "zero", 1);
  CHECK(kernels::configure_threads_from_env() == 1);
  ::setenv("AUSREC_THREADS", "3x", 1);
  CHECK(kernels::configure_threads_from_env() == 1);
  CHECK(warnings == 2);
  ::unsetenv("AUSREC_THREADS");
}
