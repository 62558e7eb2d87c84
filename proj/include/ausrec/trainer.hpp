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

// Joint training of the propagation encoder with the auxiliary tasks. Each
// step runs three stages:
//   I   virtual step  W_hat = W - lr * grad_W(joint loss weighted by V(.; Theta))
//   II  Theta <- Adam step on grad_Theta of the meta-set primary loss at W_hat
//   III W <- Adam step on the joint loss re-weighted with the new Theta
// Stage I is never applied to W; it only exists to be differentiated in II.

#include <ausrec/encoder.hpp>
#include <ausrec/eval.hpp>
#include <ausrec/loss.hpp>
#include <ausrec/optim.hpp>
#include <ausrec/sampling.hpp>
#include <ausrec/tasks.hpp>
#include <ausrec/weight_net.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ausrec {

enum class Mode { Full, NoAw, SingleTask, SingleTaskNoAw, PrimaryOnly };

struct RunMode {
  Mode mode = Mode::Full;
  TaskKind task = TaskKind::SocialTriangle;  // single-task modes only

  // "full", "no-aw", "single-task:<s>", "single-task-no-aw:<s>",
  // "primary-only".
  static RunMode parse(const std::string& text);
  std::string to_string() const;

  bool uses_weight_net() const {
    return mode == Mode::Full || mode == Mode::SingleTask;
  }
  std::vector<TaskKind> tasks() const;
};

struct Hyperparams {
  Index batch_size = 2048;
  double lr = 0.001;        // encoder step, also the Stage I virtual step
  double meta_lr = 0.0001;  // weighting-network step
  double l2 = 1e-4;
  Index dim = 128;
  int layers = 3;
  std::vector<Index> arch{8, 1000, 1};
  int epochs = 100;
  double meta_fraction = 0.05;
  std::uint64_t seed = 2024;
  int train_parts = 4;
  int test_parts = 1;
  int patience = 20;  // epochs without a Recall@10 gain before stopping
  double init_std = 0.01;
  Index k_max = 20;

  void validate() const;
};

// Everything derived from the dataset once per run. Adjacency, task mining
// and negative sampling only ever see the train + meta interactions.
struct TrainingData {
  Index m = 0;
  Index n = 0;
  PrimarySplit split;
  SparseMatrix train_pattern;  // train + meta, m x n
  SparseMatrix meta_pattern;
  SparseMatrix test_pattern;
  std::shared_ptr<const SparseMatrix> a_hat;
  EdgeSet primary;  // train + meta
  std::vector<RelationSet> relations;  // ssl1..ssl7
  std::vector<EdgeSet> task_edges;     // ssl1..ssl7

  static TrainingData build(const Dataset& d, const Hyperparams& hp);
  // Dataset with R restricted to train + meta.
  Dataset train_dataset(const Dataset& full) const;
};

// Shape of the differentiable objective.
struct Objective {
  std::shared_ptr<const SparseMatrix> a_hat;
  Index m = 0;
  Index n = 0;
  int layers = 3;
  double l2 = 0.0;

  PropagatedEmbeddings propagate(const Matrix& w) const;
  // Gradient of a function of E_final with respect to W.
  Matrix pull_back(const Matrix& grad_final) const;
};

// Per-task weights for a vector of per-sample losses.
using Weigher = std::function<WeightBatch(TaskKind, const Vector& losses)>;
Weigher net_weigher(const WeightNetParams& theta);
// V == 1 for every sample.
Weigher unit_weigher();

struct JointGradient {
  Matrix grad;  // d/dW
  double objective = 0.0;
  std::vector<Vector> aux_losses;
  std::vector<WeightBatch> weights;
};

// mean primary loss + sum_s mean_i V_i * l_i, and its exact gradient in W
// (V's loss input is differentiated too).
JointGradient joint_gradient(const Objective& obj, const Matrix& w,
                             const TripletBatch& primary,
                             std::span<const TripletBatch> aux,
                             const Weigher& weigher);

// Stage I.
Matrix virtual_update(const Objective& obj, const Matrix& w,
                      const WeightNetParams& theta,
                      const TripletBatch& primary_train,
                      std::span<const TripletBatch> aux, double lr);

// Mean BPR loss of the meta batch at the given parameters.
double meta_objective(const Objective& obj, const Matrix& w,
                      const TripletBatch& meta);

// grad_Theta meta_objective(virtual_update(W, Theta)) via the per-sample
// chain rule.
WeightNetParams meta_gradient(const Objective& obj, const Matrix& w,
                              const WeightNetParams& theta,
                              const TripletBatch& primary_train,
                              std::span<const TripletBatch> aux,
                              const TripletBatch& meta, double lr);

// Same quantity by differentiating the recorded inner backward pass.
WeightNetParams meta_gradient_reference(const Objective& obj, const Matrix& w,
                                        const WeightNetParams& theta,
                                        const TripletBatch& primary_train,
                                        std::span<const TripletBatch> aux,
                                        const TripletBatch& meta, double lr);

struct TrainState {
  EmbeddingTable emb;
  WeightNetParams theta;
  Adam w_opt;
  std::vector<Adam> theta_opt;  // one per entry of theta.to_matrices()
  Index epoch = 0;
  Index step = 0;
  // Mean weight per task at every step; NaN where a task was inactive.
  std::vector<std::array<double, kNumTasks>> weight_log;

  static TrainState init(const TrainingData& data, const Hyperparams& hp);
};

struct StepBatches {
  TripletBatch primary;        // drawn from train + meta
  TripletBatch primary_train;  // part of `primary` outside the meta set
  TripletBatch primary_meta;   // part of `primary` inside the meta set
  std::vector<TripletBatch> aux;
};

StepBatches sample_step(const TrainingData& data, const RunMode& mode,
                        Index batch_size, std::mt19937_64& rng);

// Stage II. Returns false (and leaves Theta alone) when the meta batch is
// empty.
bool update_theta(TrainState& state, const Objective& obj,
                  const StepBatches& batches, double lr, double meta_lr);

struct StepReport {
  double objective = 0.0;
  std::array<double, kNumTasks> mean_weight;
};

// Stage III. Appends the mean weights to state.weight_log.
StepReport update_w(TrainState& state, const Objective& obj,
                    const StepBatches& batches, const Weigher& weigher,
                    double lr);

// One full step for the given mode. freeze_weights forces V == 1 while still
// running Stages I and II.
StepReport train_step(TrainState& state, const Objective& obj,
                      const StepBatches& batches, const RunMode& mode,
                      const Hyperparams& hp, bool freeze_weights = false);

struct EpochRecord {
  Index epoch = 0;
  double mean_objective = 0.0;
  MetricSet metrics;
};

struct TrainOptions {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const TrainState&)> on_step;
  bool freeze_weights = false;
  bool evaluate = true;
};

struct TrainResult {
  TrainState state;  // parameters at the best Recall@10 epoch
  std::vector<EpochRecord> history;
  Index best_epoch = 0;
  bool diverged = false;
  std::string stop_reason;
};

Objective make_objective(const TrainingData& data, const Hyperparams& hp);

MetricSet evaluate(const TrainingData& data, const EmbeddingTable& emb,
                   Index k_max = 20);

TrainResult train(const TrainingData& data, const Hyperparams& hp,
                  const RunMode& mode, const TrainOptions& options = {});

}  // namespace ausrec
