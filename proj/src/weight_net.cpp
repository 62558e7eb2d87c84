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

#include <ausrec/weight_net.hpp>

#include <cmath>
#include <sstream>

namespace ausrec {

std::vector<Index> WeightNetParams::widths() const {
  std::vector<Index> w;
  if (layers.empty()) {
    return w;
  }
  w.push_back(layers.front().weight.rows());
  for (const auto& l : layers) {
    w.push_back(l.weight.cols());
  }
  return w;
}

Index WeightNetParams::parameter_count() const {
  Index count = 0;
  for (const auto& l : layers) {
    count += l.weight.size() + l.bias.size();
  }
  return count;
}

bool WeightNetParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      return false;
    }
  }
  return true;
}

namespace {

void check_widths(std::span<const Index> widths) {
  if (widths.size() < 2 || widths.front() != kWeightNetInput ||
      widths.back() != 1) {
    throw ArgumentError("weighting network must map 8 inputs to 1 output");
  }
  for (const Index w : widths) {
    if (w < 1) {
      throw ArgumentError("layer widths must be positive");
    }
  }
}

}  // namespace

WeightNetParams WeightNetParams::random(std::span<const Index> widths,
                                        std::mt19937_64& rng, double stddev) {
  check_widths(widths);
  std::normal_distribution<double> normal(0.0, stddev);
  WeightNetParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{Matrix(widths[l], widths[l + 1]),
                     RowVector::Zero(widths[l + 1])};
    for (Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = normal(rng);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

WeightNetParams WeightNetParams::zeros(std::span<const Index> widths) {
  check_widths(widths);
  WeightNetParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.layers.push_back(DenseLayer{Matrix::Zero(widths[l], widths[l + 1]),
                                  RowVector::Zero(widths[l + 1])});
  }
  return p;
}

std::vector<Matrix> WeightNetParams::to_matrices() const {
  std::vector<Matrix> out;
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

WeightNetParams WeightNetParams::from_matrices(std::span<const Matrix> mats) {
  if (mats.size() % 2 != 0) {
    throw ArgumentError("expected alternating weight/bias matrices");
  }
  WeightNetParams p;
  for (std::size_t i = 0; i < mats.size(); i += 2) {
    if (mats[i + 1].rows() != 1 || mats[i + 1].cols() != mats[i].cols()) {
      throw ArgumentError("bias shape does not match weight");
    }
    p.layers.push_back(DenseLayer{mats[i], mats[i + 1].row(0)});
  }
  return p;
}

bool operator==(const WeightNetParams& a, const WeightNetParams& b) {
  if (a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& x = a.layers[l];
    const auto& y = b.layers[l];
    if (x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.weight != y.weight ||
        x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

std::vector<Index> parse_architecture(const std::string& spec) {
  std::vector<Index> widths;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, '-')) {
    try {
      std::size_t used = 0;
      const long long w = std::stoll(part, &used);
      if (used != part.size()) {
        throw ArgumentError("bad width");
      }
      widths.push_back(static_cast<Index>(w));
    } catch (const std::exception&) {
      throw ArgumentError("cannot parse architecture '" + spec + "'");
    }
  }
  check_widths(widths);
  return widths;
}

std::string format_architecture(std::span<const Index> widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) {
      out += '-';
    }
    out += std::to_string(widths[i]);
  }
  return out;
}

const std::vector<std::string>& supported_architectures() {
  static const std::vector<std::string> archs = {"8-1000-1", "8-500-1",
                                                 "8-100-100-1", "8-1000-1000-1"};
  return archs;
}

RowVector task_code(TaskKind task) {
  RowVector code = RowVector::Zero(kNumTasks);
  code(task_index(task) - 1) = 1.0;
  return code;
}

double weight_forward(const WeightNetParams& params, double loss,
                      TaskKind task) {
  if (!std::isfinite(loss)) {
    throw ArgumentError("weighting network input loss is not finite");
  }
  RowVector h(kWeightNetInput);
  h << loss, task_code(task);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    RowVector z = h * params.layers[l].weight + params.layers[l].bias;
    if (l + 1 < params.layers.size()) {
      h = z.cwiseMax(0.0);
    } else {
      return ad::stable_sigmoid(z(0));
    }
  }
  throw ArgumentError("weighting network has no layers");
}

namespace {

// Forward pass over (value, d/dloss) pairs, keeping what the backward pass
// needs.
struct DualTrace {
  std::vector<Matrix> inputs;    // layer inputs H_l
  std::vector<Matrix> tangents;  // dH_l/dloss
  std::vector<Matrix> masks;     // rectifier masks of hidden layers
  Vector weight;
  Vector slope;
  Vector out_tangent;  // d(pre-sigmoid)/dloss
};

DualTrace dual_forward(const WeightNetParams& params, const Vector& losses,
                       TaskKind task) {
  if (params.layers.empty() ||
      params.layers.front().weight.rows() != kWeightNetInput ||
      params.layers.back().weight.cols() != 1) {
    throw ArgumentError("weighting network must map 8 inputs to 1 output");
  }
  if (!losses.allFinite()) {
    throw ArgumentError("weighting network input loss is not finite");
  }
  const Index n = losses.size();
  DualTrace trace;
  Matrix h(n, kWeightNetInput);
  h.col(0) = losses;
  h.rightCols(kNumTasks) = task_code(task).replicate(n, 1);
  Matrix dh = Matrix::Zero(n, kWeightNetInput);
  dh.col(0).setOnes();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Matrix z = h * layer.weight;
    z.rowwise() += layer.bias;
    Matrix dz = dh * layer.weight;
    trace.inputs.push_back(std::move(h));
    trace.tangents.push_back(std::move(dh));
    if (l + 1 < params.layers.size()) {
      Matrix mask = (z.array() > 0.0).cast<double>().matrix();
      h = z.cwiseProduct(mask);
      dh = dz.cwiseProduct(mask);
      trace.masks.push_back(std::move(mask));
    } else {
      trace.weight = z.col(0).unaryExpr(
        [](double x) { return ad::stable_sigmoid(x); });
      trace.out_tangent = dz.col(0);
      trace.slope = trace.weight.cwiseProduct(
                      (1.0 - trace.weight.array()).matrix())
                      .cwiseProduct(trace.out_tangent);
    }
  }
  return trace;
}

}  // namespace

WeightBatch weight_forward_batch(const WeightNetParams& params,
                                 const Vector& losses, TaskKind task) {
  DualTrace trace = dual_forward(params, losses, task);
  return WeightBatch{std::move(trace.weight), std::move(trace.slope)};
}

WeightNetParams weight_param_gradient(const WeightNetParams& params,
                                      const Vector& losses, TaskKind task,
                                      const Vector& value_coef,
                                      const Vector& slope_coef) {
  if (value_coef.size() != losses.size() ||
      slope_coef.size() != losses.size()) {
    throw ArgumentError("coefficient vectors must match the loss count");
  }
  const DualTrace trace = dual_forward(params, losses, task);
  const Vector& v = trace.weight;
  const Vector sig_prime = v.cwiseProduct((1.0 - v.array()).matrix());
  // F = a*V + b*V', V = s(o), V' = s'(o) * o_dot.
  Vector z_bar = value_coef.cwiseProduct(sig_prime) +
                 slope_coef.cwiseProduct(trace.out_tangent)
                   .cwiseProduct(sig_prime)
                   .cwiseProduct((1.0 - 2.0 * v.array()).matrix());
  Vector dz_bar = slope_coef.cwiseProduct(sig_prime);

  Matrix zb = z_bar;
  Matrix dzb = dz_bar;
  WeightNetParams grad = WeightNetParams::zeros(params.widths());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    grad.layers[l].weight.noalias() = trace.inputs[l].transpose() * zb;
    grad.layers[l].weight.noalias() += trace.tangents[l].transpose() * dzb;
    grad.layers[l].bias = zb.colwise().sum();
    if (l == 0) {
      break;
    }
    Matrix hb = zb * layer.weight.transpose();
    Matrix dhb = dzb * layer.weight.transpose();
    const Matrix& mask = trace.masks[l - 1];
    zb = hb.cwiseProduct(mask);
    dzb = dhb.cwiseProduct(mask);
  }
  return grad;
}

ad::Tracked weight_forward(std::span<const ad::Tracked> theta,
                           const ad::Tracked& losses, TaskKind task) {
  if (theta.empty() || theta.size() % 2 != 0) {
    throw ArgumentError("theta must hold alternating weights and biases");
  }
  if (losses.cols() != 1) {
    throw ArgumentError("losses must be a column");
  }
  ad::Tape& tape = *losses.tape();
  const Index n = losses.rows();
  ad::Tracked h = ad::concat_cols(
    losses, tape.constant(task_code(task).replicate(n, 1)));
  const std::size_t num_layers = theta.size() / 2;
  for (std::size_t l = 0; l < num_layers; ++l) {
    ad::Tracked z = ad::add(ad::matmul(h, theta[2 * l]),
                            ad::broadcast_rows(theta[2 * l + 1], n));
    h = (l + 1 < num_layers) ? ad::relu(z) : ad::sigmoid(z);
  }
  if (h.cols() != 1) {
    throw ArgumentError("weighting network output must be 1 wide");
  }
  return h;
}

}  // namespace ausrec
