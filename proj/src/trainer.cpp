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

#include <ausrec/trainer.hpp>

#include <ausrec/log.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ausrec {

RunMode RunMode::parse(const std::string& text) {
  const auto task_suffix = [&](const std::string& prefix) {
    const std::string rest = text.substr(prefix.size());
    try {
      return task_from_index(std::stoi(rest));
    } catch (const ArgumentError&) {
      throw;
    } catch (const std::exception&) {
      throw ArgumentError("bad task index in mode '" + text + "'");
    }
  };
  if (text == "full") {
    return {Mode::Full};
  }
  if (text == "no-aw" || text == "no_aw") {
    return {Mode::NoAw};
  }
  if (text == "primary-only" || text == "primary_only") {
    return {Mode::PrimaryOnly};
  }
  for (const std::string prefix : {"single-task-no-aw:", "single_task_no_aw:"}) {
    if (text.rfind(prefix, 0) == 0) {
      return {Mode::SingleTaskNoAw, task_suffix(prefix)};
    }
  }
  for (const std::string prefix : {"single-task:", "single_task:"}) {
    if (text.rfind(prefix, 0) == 0) {
      return {Mode::SingleTask, task_suffix(prefix)};
    }
  }
  throw ArgumentError("unknown mode '" + text + "'");
}

std::string RunMode::to_string() const {
  switch (mode) {
    case Mode::Full: return "full";
    case Mode::NoAw: return "no-aw";
    case Mode::PrimaryOnly: return "primary-only";
    case Mode::SingleTask:
      return "single-task:" + std::to_string(task_index(task));
    case Mode::SingleTaskNoAw:
      return "single-task-no-aw:" + std::to_string(task_index(task));
  }
  return "unknown";
}

std::vector<TaskKind> RunMode::tasks() const {
  switch (mode) {
    case Mode::Full:
    case Mode::NoAw:
      return {kAllTasks.begin(), kAllTasks.end()};
    case Mode::SingleTask:
    case Mode::SingleTaskNoAw:
      return {task};
    case Mode::PrimaryOnly:
      return {};
  }
  return {};
}

void Hyperparams::validate() const {
  if (batch_size < 1) {
    throw ArgumentError("batch size must be >= 1");
  }
  if (!(lr > 0.0) || !(meta_lr > 0.0)) {
    throw ArgumentError("learning rates must be > 0");
  }
  if (!(l2 >= 0.0)) {
    throw ArgumentError("l2 must be >= 0");
  }
  if (dim < 1 || layers < 1 || epochs < 0 || patience < 1 || k_max < 1) {
    throw ArgumentError("dim, layers, patience and k_max must be positive");
  }
  if (!(meta_fraction > 0.0 && meta_fraction < 0.5)) {
    throw ArgumentError("meta fraction must lie in (0, 0.5)");
  }
  parse_architecture(format_architecture(arch));
}

TrainingData TrainingData::build(const Dataset& d, const Hyperparams& hp) {
  d.validate();
  TrainingData data;
  data.m = d.m;
  data.n = d.n;
  data.split = split_primary(d, hp.train_parts, hp.test_parts,
                             hp.meta_fraction, hp.seed);
  const std::vector<Edge> primary = data.split.primary();
  data.train_pattern = edges_to_matrix(d.m, d.n, primary);
  data.meta_pattern = edges_to_matrix(d.m, d.n, data.split.meta);
  data.test_pattern = edges_to_matrix(d.m, d.n, data.split.test);
  const Dataset train_view = data.train_dataset(d);
  data.a_hat = std::make_shared<const SparseMatrix>(
    sym_normalize(build_joint_adjacency(train_view)));
  data.primary = EdgeSet::primary(d.m, d.n, primary);
  data.relations = mine_all(train_view);
  for (const auto& rel : data.relations) {
    data.task_edges.push_back(EdgeSet::auxiliary(rel));
  }
  return data;
}

Dataset TrainingData::train_dataset(const Dataset& full) const {
  return Dataset{full.m, full.n, train_pattern, full.S};
}

PropagatedEmbeddings Objective::propagate(const Matrix& w) const {
  return PropagatedEmbeddings{m, n, propagate_mean(*a_hat, w, layers), {}};
}

Matrix Objective::pull_back(const Matrix& grad_final) const {
  // The normalized adjacency is symmetric, so propagation is self-adjoint.
  return propagate_mean(*a_hat, grad_final, layers);
}

Weigher net_weigher(const WeightNetParams& theta) {
  return [&theta](TaskKind task, const Vector& losses) {
    return weight_forward_batch(theta, losses, task);
  };
}

Weigher unit_weigher() {
  return [](TaskKind, const Vector& losses) {
    return WeightBatch{Vector::Ones(losses.size()),
                       Vector::Zero(losses.size())};
  };
}

namespace {

double inverse_size(const TripletBatch& b) {
  return 1.0 / static_cast<double>(b.size());
}

std::array<double, kNumTasks> nan_weights() {
  std::array<double, kNumTasks> w;
  w.fill(std::numeric_limits<double>::quiet_NaN());
  return w;
}

}  // namespace

JointGradient joint_gradient(const Objective& obj, const Matrix& w,
                             const TripletBatch& primary,
                             std::span<const TripletBatch> aux,
                             const Weigher& weigher) {
  const PropagatedEmbeddings p = obj.propagate(w);
  Matrix grad_final = Matrix::Zero(w.rows(), w.cols());
  Matrix grad_e0 = Matrix::Zero(w.rows(), w.cols());
  JointGradient out;
  if (!primary.empty()) {
    const BprLoss loss = bpr_loss(p, w, primary, obj.l2);
    out.objective += loss.mean;
    bpr_backward(p, w, primary, obj.l2,
                 Vector::Constant(primary.size(), inverse_size(primary)),
                 grad_final, grad_e0);
  }
  for (const auto& batch : aux) {
    if (batch.empty()) {
      out.aux_losses.emplace_back();
      out.weights.push_back({});
      continue;
    }
    const BprLoss loss = bpr_loss(p, w, batch, obj.l2);
    WeightBatch wb = weigher(*batch.task, loss.per_sample);
    out.objective +=
      wb.weight.dot(loss.per_sample) * inverse_size(batch);
    // d(V(l) l)/dl = V + l V'
    const Vector coef =
      (wb.weight + loss.per_sample.cwiseProduct(wb.slope)) *
      inverse_size(batch);
    bpr_backward(p, w, batch, obj.l2, coef, grad_final, grad_e0);
    out.aux_losses.push_back(loss.per_sample);
    out.weights.push_back(std::move(wb));
  }
  out.grad = obj.pull_back(grad_final) + grad_e0;
  return out;
}

Matrix virtual_update(const Objective& obj, const Matrix& w,
                      const WeightNetParams& theta,
                      const TripletBatch& primary_train,
                      std::span<const TripletBatch> aux, double lr) {
  const JointGradient jg =
    joint_gradient(obj, w, primary_train, aux, net_weigher(theta));
  if (!jg.grad.allFinite()) {
    throw NumericalError("virtual update: non-finite gradient");
  }
  return w - lr * jg.grad;
}

double meta_objective(const Objective& obj, const Matrix& w,
                      const TripletBatch& meta) {
  if (meta.empty()) {
    return 0.0;
  }
  return bpr_loss(obj.propagate(w), w, meta, obj.l2).mean;
}

WeightNetParams meta_gradient(const Objective& obj, const Matrix& w,
                              const WeightNetParams& theta,
                              const TripletBatch& primary_train,
                              std::span<const TripletBatch> aux,
                              const TripletBatch& meta, double lr) {
  WeightNetParams grad = WeightNetParams::zeros(theta.widths());
  if (meta.empty()) {
    return grad;
  }
  const JointGradient jg =
    joint_gradient(obj, w, primary_train, aux, net_weigher(theta));
  const Matrix w_hat = w - lr * jg.grad;

  // h = d(meta loss)/dW at W_hat.
  const PropagatedEmbeddings p_hat = obj.propagate(w_hat);
  Matrix gf = Matrix::Zero(w.rows(), w.cols());
  Matrix ge0 = Matrix::Zero(w.rows(), w.cols());
  bpr_backward(p_hat, w_hat, meta, obj.l2,
               Vector::Constant(meta.size(), inverse_size(meta)), gf, ge0);
  const Matrix h = obj.pull_back(gf) + ge0;

  // d(meta)/dTheta = -lr * sum_s (1/N_s) sum_i (grad l_i . h) dG_i/dTheta,
  // with G_i = V_i + l_i V'_i the coefficient of grad l_i in the joint
  // gradient.
  const PropagatedEmbeddings p = obj.propagate(w);
  const Matrix e_dot = obj.propagate(h).e_final;
  for (std::size_t s = 0; s < aux.size(); ++s) {
    const TripletBatch& batch = aux[s];
    if (batch.empty()) {
      continue;
    }
    const Vector& losses = jg.aux_losses[s];
    const Vector along_h =
      bpr_directional(p, w, e_dot, h, batch, obj.l2);
    const Vector coef = (-lr * inverse_size(batch)) * along_h;
    const WeightNetParams g = weight_param_gradient(
      theta, losses, *batch.task, coef, coef.cwiseProduct(losses));
    for (std::size_t l = 0; l < grad.layers.size(); ++l) {
      grad.layers[l].weight += g.layers[l].weight;
      grad.layers[l].bias += g.layers[l].bias;
    }
  }
  return grad;
}

WeightNetParams meta_gradient_reference(const Objective& obj, const Matrix& w,
                                        const WeightNetParams& theta,
                                        const TripletBatch& primary_train,
                                        std::span<const TripletBatch> aux,
                                        const TripletBatch& meta, double lr) {
  if (meta.empty()) {
    return WeightNetParams::zeros(theta.widths());
  }
  const auto inner = [&](ad::Tape& tape, const ad::Tracked& w_var,
                         std::span<const ad::Tracked> theta_vars) {
    const ad::Tracked e = propagate(obj.a_hat, w_var, obj.layers);
    ad::Tracked total = tape.scalar_constant(0.0);
    if (!primary_train.empty()) {
      total = ad::add(
        total, ad::mean(bpr_loss(e, w_var, primary_train, obj.m, obj.l2)));
    }
    for (const auto& batch : aux) {
      if (batch.empty()) {
        continue;
      }
      const ad::Tracked losses = bpr_loss(e, w_var, batch, obj.m, obj.l2);
      const ad::Tracked weights =
        weight_forward(theta_vars, losses, *batch.task);
      total = ad::add(total, ad::mean(ad::mul(weights, losses)));
    }
    return total;
  };
  const auto outer = [&](ad::Tape&, const ad::Tracked& w_hat) {
    const ad::Tracked e = propagate(obj.a_hat, w_hat, obj.layers);
    return ad::mean(bpr_loss(e, w_hat, meta, obj.m, obj.l2));
  };
  const std::vector<Matrix> theta_mats = theta.to_matrices();
  const std::vector<Matrix> grads =
    ad::grad_through_update(inner, outer, w, theta_mats, lr);
  return WeightNetParams::from_matrices(grads);
}

TrainState TrainState::init(const TrainingData& data, const Hyperparams& hp) {
  std::mt19937_64 rng(hp.seed);
  TrainState state;
  state.emb = EmbeddingTable::random(data.m, data.n, hp.dim, hp.layers, rng,
                                     hp.init_std);
  state.theta = WeightNetParams::random(hp.arch, rng, hp.init_std);
  state.w_opt = Adam(state.emb.e0.rows(), state.emb.e0.cols());
  for (const auto& mat : state.theta.to_matrices()) {
    state.theta_opt.emplace_back(mat.rows(), mat.cols());
  }
  return state;
}

StepBatches sample_step(const TrainingData& data, const RunMode& mode,
                        Index batch_size, std::mt19937_64& rng) {
  StepBatches b;
  b.primary = sample_batch(data.primary, std::nullopt, batch_size, rng);
  for (Index i = 0; i < b.primary.size(); ++i) {
    auto& part = data.meta_pattern.contains(b.primary.anchors[i],
                                            b.primary.positives[i])
                   ? b.primary_meta
                   : b.primary_train;
    part.push_back(b.primary.anchors[i], b.primary.positives[i],
                   b.primary.negatives[i]);
  }
  for (const TaskKind task : mode.tasks()) {
    const EdgeSet& edges = data.task_edges[task_index(task) - 1];
    if (edges.empty()) {
      TripletBatch empty;
      empty.task = task;
      b.aux.push_back(std::move(empty));
      continue;
    }
    b.aux.push_back(sample_batch(edges, task, batch_size, rng));
  }
  return b;
}

bool update_theta(TrainState& state, const Objective& obj,
                  const StepBatches& batches, double lr, double meta_lr) {
  if (batches.primary_meta.empty()) {
    return false;
  }
  const WeightNetParams grad =
    meta_gradient(obj, state.emb.e0, state.theta, batches.primary_train,
                  batches.aux, batches.primary_meta, lr);
  if (!grad.all_finite()) {
    throw NumericalError("weighting network: non-finite meta-gradient");
  }
  std::vector<Matrix> params = state.theta.to_matrices();
  const std::vector<Matrix> grads = grad.to_matrices();
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.theta_opt[i].step(params[i], grads[i], meta_lr);
  }
  state.theta = WeightNetParams::from_matrices(params);
  return true;
}

StepReport update_w(TrainState& state, const Objective& obj,
                    const StepBatches& batches, const Weigher& weigher,
                    double lr) {
  const JointGradient jg =
    joint_gradient(obj, state.emb.e0, batches.primary, batches.aux, weigher);
  if (!std::isfinite(jg.objective) || !jg.grad.allFinite()) {
    throw NumericalError("encoder update: non-finite loss or gradient");
  }
  state.w_opt.step(state.emb.e0, jg.grad, lr);
  StepReport report{jg.objective, nan_weights()};
  for (std::size_t s = 0; s < batches.aux.size(); ++s) {
    if (!batches.aux[s].empty()) {
      report.mean_weight[task_index(*batches.aux[s].task) - 1] =
        jg.weights[s].weight.mean();
    }
  }
  if (!batches.aux.empty()) {
    state.weight_log.push_back(report.mean_weight);
  }
  return report;
}

StepReport train_step(TrainState& state, const Objective& obj,
                      const StepBatches& batches, const RunMode& mode,
                      const Hyperparams& hp, bool freeze_weights) {
  if (mode.uses_weight_net()) {
    update_theta(state, obj, batches, hp.lr, hp.meta_lr);
  }
  const Weigher weigher = (mode.uses_weight_net() && !freeze_weights)
                            ? net_weigher(state.theta)
                            : unit_weigher();
  StepReport report = update_w(state, obj, batches, weigher, hp.lr);
  ++state.step;
  return report;
}

Objective make_objective(const TrainingData& data, const Hyperparams& hp) {
  return Objective{data.a_hat, data.m, data.n, hp.layers, hp.l2};
}

MetricSet evaluate(const TrainingData& data, const EmbeddingTable& emb,
                   Index k_max) {
  const PropagatedEmbeddings p = propagate(*data.a_hat, emb);
  return compute_metrics(
    rank_all(p, data.train_pattern, data.test_pattern, k_max));
}

TrainResult train(const TrainingData& data, const Hyperparams& hp,
                  const RunMode& mode, const TrainOptions& options) {
  hp.validate();
  const Objective obj = make_objective(data, hp);
  TrainState state = TrainState::init(data, hp);
  // Sampling draws from its own stream so initialization and sampling stay
  // independent of each other.
  std::mt19937_64 rng(hp.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto pri_edges = static_cast<Index>(data.primary.edges().size());
  const Index steps_per_epoch =
    std::max<Index>(1, (pri_edges + hp.batch_size - 1) / hp.batch_size);

  TrainResult result;
  result.state = state;
  TrainState last_good = state;
  double best_recall = -1.0;
  int stale = 0;
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    double objective_sum = 0.0;
    try {
      for (Index s = 0; s < steps_per_epoch; ++s) {
        const StepBatches batches = sample_step(data, mode, hp.batch_size, rng);
        const StepReport report =
          train_step(state, obj, batches, mode, hp, options.freeze_weights);
        objective_sum += report.objective;
        if (options.on_step) {
          options.on_step(state);
        }
      }
    } catch (const NumericalError& e) {
      log::warn(std::string("training diverged in epoch ") +
                std::to_string(epoch) + ": " + e.what());
      result.diverged = true;
      result.stop_reason = e.what();
      state = last_good;
      break;
    }
    state.epoch = epoch;
    last_good = state;
    EpochRecord record;
    record.epoch = epoch;
    record.mean_objective = objective_sum / static_cast<double>(steps_per_epoch);
    if (options.evaluate) {
      record.metrics = evaluate(data, state.emb, hp.k_max);
    }
    result.history.push_back(record);
    if (options.on_epoch) {
      options.on_epoch(record);
    }
    if (!options.evaluate) {
      result.state = state;
      result.best_epoch = epoch;
      continue;
    }
    const double recall10 = record.metrics.recall.count(10) > 0
                              ? record.metrics.recall.at(10)
                              : record.metrics.recall.begin()->second;
    if (recall10 > best_recall) {
      best_recall = recall10;
      result.best_epoch = epoch;
      result.state = state;
      stale = 0;
    } else if (++stale >= hp.patience) {
      result.stop_reason = "early stop: no Recall@10 gain for " +
                           std::to_string(hp.patience) + " epochs";
      break;
    }
  }
  if (result.best_epoch == 0) {
    result.state = state;
  }
  result.state.weight_log = state.weight_log;
  if (result.stop_reason.empty()) {
    result.stop_reason = "epoch budget exhausted";
  }
  return result;
}

}  // namespace ausrec
