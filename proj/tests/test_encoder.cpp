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

#include <ausrec/encoder.hpp>

#include <doctest.h>

#include <memory>

using namespace ausrec;

namespace {

// Random user-item graph with n_users + n_items = nodes, normalized.
SparseMatrix random_a_hat(Index m, Index n, std::mt19937_64& rng) {
  Dataset d;
  d.m = m;
  d.n = n;
  d.R = SparseMatrix::from_dense(oracle::random_pattern(m, n, 0.4, rng));
  d.S = SparseMatrix::from_dense(oracle::random_graph(m, 0.4, rng));
  return sym_normalize(build_joint_adjacency(d));
}

EmbeddingTable table(Index m, Index n, int layers, Matrix e0) {
  return EmbeddingTable{m, n, layers, std::move(e0)};
}

}  // namespace

TEST_CASE("propagation trivial cases") {
  std::mt19937_64 rng(31);
  const Matrix e0 = oracle::random_dense(5, 3, rng);
  const auto p0 = propagate(SparseMatrix(5, 5), table(3, 2, 1, e0));
  CHECK(p0.e_final == Matrix(e0 / 2.0));
  const auto p1 = propagate(SparseMatrix::identity(5), table(3, 2, 2, e0));
  CHECK(oracle::max_abs_diff(p1.e_final, e0) < 1e-15);
  for (int k = 1; k <= 5; ++k) {
    CHECK(oracle::max_abs_diff(
            propagate_mean(SparseMatrix::identity(5), e0, k), e0) < 1e-15);
  }
}

TEST_CASE("propagation matches the dense reference") {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    const SparseMatrix a_hat = random_a_hat(3, 2, rng);
    const Matrix e0 = oracle::random_dense(5, 4, rng);
    const auto p = propagate(a_hat, table(3, 2, 3, e0), true);
    CHECK(oracle::max_abs_diff(
            p.e_final, oracle::mean_propagation(a_hat.to_dense(), e0, 3)) <
          1e-10);
    REQUIRE(p.per_layer.size() == 4);
    CHECK(p.per_layer[0] == e0);
  }
}

TEST_CASE("propagation is linear and self-adjoint") {
  std::mt19937_64 rng(33);
  const SparseMatrix a_hat = random_a_hat(5, 4, rng);
  const Matrix x = oracle::random_dense(9, 3, rng);
  const Matrix y = oracle::random_dense(9, 3, rng);
  const double alpha = 0.7;
  const double beta = -1.3;
  CHECK(oracle::max_abs_diff(
          propagate_mean(a_hat, alpha * x + beta * y, 3),
          alpha * propagate_mean(a_hat, x, 3) +
            beta * propagate_mean(a_hat, y, 3)) < 1e-10);
  const double lhs = propagate_mean(a_hat, x, 3).cwiseProduct(y).sum();
  const double rhs = x.cwiseProduct(propagate_mean(a_hat, y, 3)).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("recorded propagation gradient matches finite differences") {
  std::mt19937_64 rng(34);
  for (int rep = 0; rep < 5; ++rep) {
    auto a_hat =
      std::make_shared<const SparseMatrix>(random_a_hat(4, 4, rng));
    const Matrix e0 = oracle::random_dense(8, 4, rng);
    const Matrix w = oracle::random_dense(8, 4, rng);
    // Nonlinear scalar of e_final: sum(w .* tanh-free square).
    const auto f = [&](const Matrix& x) {
      const Matrix e = propagate_mean(*a_hat, x, 3);
      return e.cwiseProduct(e).cwiseProduct(w).sum();
    };
    ad::Tape tape;
    const ad::Tracked x = tape.variable(e0);
    const ad::Tracked e = propagate(a_hat, x, 3);
    const ad::Tracked out =
      ad::sum(ad::mul(ad::mul(e, e), tape.constant(w)));
    CHECK(out.scalar() == doctest::Approx(f(e0)).epsilon(1e-12));
    const Matrix g = tape.grad_values(out, std::span(&x, 1))[0];
    Matrix numeric(8, 4);
    const double h = 1e-4;
    for (Index i = 0; i < e0.size(); ++i) {
      Matrix up = e0;
      Matrix down = e0;
      up.data()[i] += h;
      down.data()[i] -= h;
      numeric.data()[i] = (f(up) - f(down)) / (2 * h);
    }
    CHECK(oracle::max_rel_err(g, numeric, 1e-3) < 1e-5);
  }
}

TEST_CASE("divergence names the layer") {
  Matrix e0 = Matrix::Ones(2, 1);
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1e300}, {1, 0, 1e300}});
  try {
    propagate(a, table(1, 1, 3, e0));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("layer 2") != std::string::npos);
  }
}

TEST_CASE("scores") {
  std::mt19937_64 rng(35);
  const Matrix e0 = oracle::random_dense(7, 4, rng);
  const auto p = propagate(SparseMatrix(7, 7), table(4, 3, 1, e0));
  for (Index u = 0; u < 4; ++u) {
    for (Index v = 0; v < 3; ++v) {
      double dot = 0.0;
      for (Index c = 0; c < 4; ++c) {
        dot += p.e_final(u, c) * p.e_final(4 + v, c);
      }
      CHECK(score_user_item(p, u, v) == doctest::Approx(dot).epsilon(1e-15));
    }
    for (Index w = 0; w < 4; ++w) {
      CHECK(score_user_user(p, u, w) == score_user_user(p, w, u));
    }
    CHECK(score_user_user(p, u, u) >= 0.0);
  }
  CHECK_THROWS_AS(score_user_item(p, 4, 0), ArgumentError);
  CHECK_THROWS_AS(score_user_item(p, 0, 3), ArgumentError);
  CHECK_THROWS_AS(score_user_user(p, 0, 4), ArgumentError);
}

TEST_CASE("random initialization has the requested scale") {
  std::mt19937_64 rng(36);
  const auto t = EmbeddingTable::random(300, 200, 64, 3, rng, 0.01);
  CHECK(t.e0.rows() == 500);
  CHECK(t.dim() == 64);
  const double mean = t.e0.mean();
  const double var = (t.e0.array() - mean).square().mean();
  CHECK(std::abs(mean) < 1e-3);
  CHECK(std::sqrt(var) == doctest::Approx(0.01).epsilon(0.02));
  CHECK_THROWS_AS(EmbeddingTable::random(0, 1, 4, 3, rng), ArgumentError);
}
