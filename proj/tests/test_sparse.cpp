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

#include "oracles.hpp"

#include <ausrec/sparse.hpp>

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace ausrec;

namespace {

Dataset make_dataset(Index m, Index n, std::mt19937_64& rng) {
  Dataset d;
  d.m = m;
  d.n = n;
  d.R = SparseMatrix::from_dense(oracle::random_pattern(m, n, 0.2, rng));
  d.S = SparseMatrix::from_dense(oracle::random_graph(m, 0.2, rng));
  return d;
}

}  // namespace

TEST_CASE("triplets: duplicates are summed and cancelled entries dropped") {
  const auto a = SparseMatrix::from_triplets(
    2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {0, 0, 1.0}, {0, 0, -1.0}});
  CHECK(a.nnz() == 2);
  CHECK(a.at(1, 2) == doctest::Approx(1.5));
  CHECK(a.at(0, 1) == 2.0);
  CHECK_FALSE(a.contains(0, 0));
  CHECK(a.at(1, 0) == 0.0);
}

TEST_CASE("triplets: out-of-range coordinates are rejected") {
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}),
                  StructuralError);
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, -1, 1.0}}),
                  StructuralError);
}

TEST_CASE("csr constructor validates its arrays") {
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}), StructuralError);
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}),
                  StructuralError);
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {0}, {0.0}), StructuralError);
  CHECK_NOTHROW(SparseMatrix(2, 2, {0, 1, 2}, {1, 0}, {1.0, 1.0}));
}

TEST_CASE("dense round trip, transpose and block match dense algebra") {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix x = oracle::random_dense(7, 5, rng);
    x = x.unaryExpr([](double v) { return std::abs(v) < 0.7 ? 0.0 : v; });
    const auto a = SparseMatrix::from_dense(x);
    CHECK(a.to_dense() == x);
    CHECK(a.transpose().to_dense() == Matrix(x.transpose()));
    CHECK(a.block(2, 1, 4, 3).to_dense() == Matrix(x.block(2, 1, 4, 3)));
    CHECK(a.binarized().to_dense() == oracle::binarize(x));
  }
}

TEST_CASE("joint adjacency places S, R and R^T in the right blocks") {
  std::mt19937_64 rng(2);
  const Dataset d = make_dataset(6, 4, rng);
  const Matrix a = build_joint_adjacency(d).to_dense();
  REQUIRE(a.rows() == 10);
  CHECK(a.topLeftCorner(6, 6) == d.S.to_dense());
  CHECK(a.topRightCorner(6, 4) == d.R.to_dense());
  CHECK(a.bottomLeftCorner(4, 6) == Matrix(d.R.to_dense().transpose()));
  CHECK(a.bottomRightCorner(4, 4).isZero());
}

TEST_CASE("symmetric normalization: dense oracle and spectral properties") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = make_dataset(8, 6, rng);
    const SparseMatrix a = build_joint_adjacency(d);
    const SparseMatrix a_hat = sym_normalize(a);
    const Matrix dense = a_hat.to_dense();
    CHECK(oracle::max_abs_diff(dense, oracle::normalize(a.to_dense())) <
          1e-14);
    CHECK(a_hat.is_symmetric());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
    CHECK(es.eigenvalues().minCoeff() >= -1.0 - 1e-12);
  }
}

TEST_CASE("symmetric normalization leaves isolated nodes at zero") {
  Dataset d;
  d.m = 3;
  d.n = 2;
  d.R = SparseMatrix::from_pattern(3, 2, {{0, 0}});
  d.S = SparseMatrix(3, 3);
  const Matrix dense = sym_normalize(build_joint_adjacency(d)).to_dense();
  CHECK(dense.allFinite());
  CHECK(dense.row(1).isZero());
  CHECK(dense.row(2).isZero());
  CHECK(dense.row(4).isZero());
  CHECK(dense(0, 3) == doctest::Approx(1.0));
}

TEST_CASE("dataset validation catches malformed graphs") {
  Dataset d;
  d.m = 2;
  d.n = 2;
  d.R = SparseMatrix::from_pattern(2, 2, {{0, 1}});
  d.S = SparseMatrix::from_pattern(2, 2, {{0, 1}});
  CHECK_THROWS_AS(d.validate(), StructuralError);  // asymmetric S
  d.S = SparseMatrix::from_pattern(2, 2, {{0, 0}});
  CHECK_THROWS_AS(d.validate(), StructuralError);  // self loop
  d.S = SparseMatrix::from_pattern(2, 2, {{0, 1}, {1, 0}});
  CHECK_NOTHROW(d.validate());
  d.R = SparseMatrix::from_triplets(2, 2, {{0, 1, 2.0}});
  CHECK_THROWS_AS(d.validate(), StructuralError);  // non-binary R
  d.R = SparseMatrix::from_pattern(2, 3, {});
  CHECK_THROWS_AS(d.validate(), StructuralError);  // wrong shape
}

TEST_CASE("graph algebra agrees with dense oracles") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix pa = oracle::random_pattern(9, 7, 0.25, rng);
    const Matrix pb = oracle::random_pattern(7, 8, 0.25, rng);
    const Matrix pc = oracle::random_pattern(9, 8, 0.3, rng);
    const auto a = SparseMatrix::from_dense(pa);
    const auto b = SparseMatrix::from_dense(pb);
    const auto c = SparseMatrix::from_dense(pc);
    CHECK(bool_product(a, b).to_dense() == oracle::binarize(pa * pb));
    const Matrix prod = bool_product(a, b).to_dense();
    CHECK(hadamard_mask(bool_product(a, b), c).to_dense() ==
          Matrix(prod.cwiseProduct(pc)));
    const Matrix x = oracle::random_dense(7, 4, rng);
    CHECK(oracle::max_abs_diff(spmm(a, x), pa * x) < 1e-12);
  }
}

TEST_CASE("exact k-hop agrees with all-pairs shortest paths") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix g = oracle::random_graph(12, 0.15, rng);
    const auto s = SparseMatrix::from_dense(g);
    for (int k = 1; k <= 4; ++k) {
      const SparseMatrix hop = exact_k_hop(s, k);
      CHECK(hop.to_dense() == oracle::exact_hop(g, k));
      CHECK(hop.is_symmetric());
      CHECK(hop.has_zero_diagonal());
    }
  }
}

TEST_CASE("k-hop and products reject bad arguments") {
  const auto s = SparseMatrix::from_pattern(3, 3, {{0, 1}, {1, 0}});
  CHECK_THROWS_AS(exact_k_hop(s, 0), ArgumentError);
  CHECK_THROWS_AS(exact_k_hop(SparseMatrix(2, 3), 1), StructuralError);
  CHECK_THROWS_AS(bool_product(s, SparseMatrix(2, 2)), StructuralError);
  CHECK_THROWS_AS(spmm(s, Matrix::Zero(2, 2)), StructuralError);
}

TEST_CASE("empty graph gives empty products") {
  const SparseMatrix s(4, 4);
  CHECK(bool_product(s, s).nnz() == 0);
  CHECK(exact_k_hop(s, 1).nnz() == 0);
  CHECK(sym_normalize(s).nnz() == 0);
}
