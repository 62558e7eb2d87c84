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

#include <ausrec/synthetic.hpp>

#include <random>
#include <utility>
#include <vector>

namespace ausrec::synthetic {

Index block_of(Index idx, Index count, Index blocks) {
  return idx * blocks / count;
}

Dataset planted_blocks(const PlantedBlocks& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<Index, Index>> r;
  std::vector<std::pair<Index, Index>> s;
  for (Index u = 0; u < cfg.users; ++u) {
    const Index bu = block_of(u, cfg.users, cfg.blocks);
    for (Index v = 0; v < cfg.items; ++v) {
      const double p =
        block_of(v, cfg.items, cfg.blocks) == bu ? cfg.p_in : cfg.p_out;
      if (coin(rng) < p) {
        r.emplace_back(u, v);
      }
    }
    for (Index w = u + 1; w < cfg.users; ++w) {
      const double q =
        block_of(w, cfg.users, cfg.blocks) == bu ? cfg.q_in : cfg.q_out;
      if (coin(rng) < q) {
        s.emplace_back(u, w);
        s.emplace_back(w, u);
      }
    }
  }
  return Dataset{cfg.users, cfg.items,
                 SparseMatrix::from_pattern(cfg.users, cfg.items, std::move(r)),
                 SparseMatrix::from_pattern(cfg.users, cfg.users, std::move(s))};
}

Dataset random_dataset(Index m, Index n, double r_density, double s_density,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<Index, Index>> r;
  std::vector<std::pair<Index, Index>> s;
  for (Index u = 0; u < m; ++u) {
    for (Index v = 0; v < n; ++v) {
      if (coin(rng) < r_density) {
        r.emplace_back(u, v);
      }
    }
    for (Index w = u + 1; w < m; ++w) {
      if (coin(rng) < s_density) {
        s.emplace_back(u, w);
        s.emplace_back(w, u);
      }
    }
  }
  return Dataset{m, n, SparseMatrix::from_pattern(m, n, std::move(r)),
                 SparseMatrix::from_pattern(m, m, std::move(s))};
}

}  // namespace ausrec::synthetic
