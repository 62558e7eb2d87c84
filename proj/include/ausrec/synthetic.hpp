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

#include <ausrec/sparse.hpp>

#include <cstdint>

namespace ausrec::synthetic {

// Users and items are split into equal contiguous blocks. A user interacts
// with an item of its own block with probability p_in and with any other
// item with probability p_out; social links follow the same pattern with
// q_in / q_out.
struct PlantedBlocks {
  Index users = 200;
  Index items = 300;
  Index blocks = 4;
  double p_in = 0.5;
  double p_out = 0.005;
  double q_in = 0.08;
  double q_out = 0.002;
  std::uint64_t seed = 7;
};

Dataset planted_blocks(const PlantedBlocks& cfg);
Index block_of(Index idx, Index count, Index blocks);

// Independent Bernoulli interactions and undirected social links.
Dataset random_dataset(Index m, Index n, double r_density, double s_density,
                       std::uint64_t seed);

}  // namespace ausrec::synthetic
