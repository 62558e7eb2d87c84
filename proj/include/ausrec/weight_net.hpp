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

// Automatic weighting network: an MLP mapping [per-sample auxiliary loss;
// one-hot task code] to a weight in (0, 1). Hidden layers use a rectifier,
// the output a sigmoid.

#include <ausrec/autodiff.hpp>
#include <ausrec/tasks.hpp>

#include <random>
#include <span>
#include <string>
#include <vector>

namespace ausrec {

inline constexpr Index kWeightNetInput = 1 + kNumTasks;

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  RowVector bias;
};

struct WeightNetParams {
  std::vector<DenseLayer> layers;

  // Layer widths including the 8-wide input and the 1-wide output.
  std::vector<Index> widths() const;
  Index parameter_count() const;
  bool all_finite() const;

  // Weights ~ N(0, stddev^2), biases 0.
  static WeightNetParams random(std::span<const Index> widths,
                                std::mt19937_64& rng, double stddev = 0.01);
  static WeightNetParams zeros(std::span<const Index> widths);

  // Flat view [W1, b1, W2, b2, ...] with biases as 1 x fan_out matrices.
  std::vector<Matrix> to_matrices() const;
  static WeightNetParams from_matrices(std::span<const Matrix> mats);

  friend bool operator==(const WeightNetParams& a, const WeightNetParams& b);
};

// Parses "8-1000-1" style strings. Input width must be 8, output width 1.
std::vector<Index> parse_architecture(const std::string& spec);
std::string format_architecture(std::span<const Index> widths);
// The four architectures the CLI accepts; the first is the default.
const std::vector<std::string>& supported_architectures();

// One-hot code of a task as a length-7 row.
RowVector task_code(TaskKind task);

// Weight for a single sample. Throws ArgumentError on a non-finite loss.
double weight_forward(const WeightNetParams& params, double loss,
                      TaskKind task);

// Per-sample weights and their derivative with respect to the loss input.
struct WeightBatch {
  Vector weight;
  Vector slope;
};

WeightBatch weight_forward_batch(const WeightNetParams& params,
                                 const Vector& losses, TaskKind task);

// Gradient with respect to every parameter of
//   sum_i value_coef[i] * V(l_i) + slope_coef[i] * dV/dl (l_i).
WeightNetParams weight_param_gradient(const WeightNetParams& params,
                                      const Vector& losses, TaskKind task,
                                      const Vector& value_coef,
                                      const Vector& slope_coef);

// Recorded forward pass. theta holds [W1, b1, W2, b2, ...] on the tape,
// losses is an N x 1 tracked column; returns N x 1 weights.
ad::Tracked weight_forward(std::span<const ad::Tracked> theta,
                           const ad::Tracked& losses, TaskKind task);

}  // namespace ausrec
