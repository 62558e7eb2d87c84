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

#include <ausrec/autodiff.hpp>

#include <atomic>
#include <cmath>

namespace ausrec::ad {
namespace {

std::atomic<std::uint64_t> next_generation{1};

using Grads = std::vector<std::optional<Tracked>>;

void require_same_shape(const Tracked& a, const Tracked& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError(std::string(op) + ": shape mismatch " +
                        std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

Tape& tape_of(const Tracked& a, const char* op) {
  if (a.tape() == nullptr) {
    throw ArgumentError(std::string(op) + ": uninitialized Tracked");
  }
  a.tape()->check_owned(a, op);
  return *a.tape();
}

Tape& common_tape(const Tracked& a, const Tracked& b, const char* op) {
  Tape& t = tape_of(a, op);
  if (b.tape() != &t) {
    throw ArgumentError(std::string(op) + ": operands live on different tapes");
  }
  t.check_owned(b, op);
  return t;
}

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_log_sigmoid(double x) {
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

const Matrix& Tracked::value() const {
  if (tape_ == nullptr) {
    throw ArgumentError("value of an uninitialized Tracked");
  }
  tape_->check_owned(*this, "value");
  return tape_->value_of(id_);
}

double Tracked::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) {
    throw ArgumentError("scalar() on a " + std::to_string(v.rows()) + "x" +
                        std::to_string(v.cols()) + " value");
  }
  return v(0, 0);
}

bool Tracked::requires_grad() const {
  return tape_ != nullptr && tape_->requires_grad_of(id_);
}

Tape::Tape() : generation_(next_generation.fetch_add(1)) {}

void Tape::check_owned(const Tracked& t, const char* op) const {
  if (t.tape() != this || t.generation() != generation_ || t.id() < 0 ||
      t.id() >= static_cast<int>(nodes_.size())) {
    throw ArgumentError(std::string(op) +
                        ": Tracked belongs to another tape generation");
  }
}

void Tape::clear() {
  nodes_.clear();
  generation_ = next_generation.fetch_add(1);
}

Tracked Tape::record(const char* op, Matrix value, std::vector<Tracked> inputs,
                     Backward backward) {
  if (check_finite_ && !value.allFinite()) {
    throw NumericalError(std::string("non-finite value produced by ") + op);
  }
  bool needs_grad = false;
  for (const auto& in : inputs) {
    check_owned(in, op);
    needs_grad = needs_grad || nodes_[in.id()].requires_grad;
  }
  if (!needs_grad) {
    inputs.clear();
    backward = nullptr;
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(
    Node{op, std::move(value), std::move(inputs), std::move(backward),
         needs_grad});
  return Tracked(this, id, generation_);
}

Tracked Tape::variable(Matrix value) {
  if (!value.allFinite()) {
    throw NumericalError("non-finite variable");
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{"variable", std::move(value), {}, nullptr, true});
  return Tracked(this, id, generation_);
}

Tracked Tape::constant(Matrix value) {
  return record("constant", std::move(value), {}, nullptr);
}

Tracked Tape::scalar_constant(double value) {
  Matrix v(1, 1);
  v(0, 0) = value;
  return constant(std::move(v));
}

std::vector<Tracked> Tape::grad(const Tracked& output,
                                std::span<const Tracked> wrt) {
  check_owned(output, "grad");
  if (output.rows() != 1 || output.cols() != 1) {
    throw ArgumentError("grad: output must be a scalar, got " +
                        std::to_string(output.rows()) + "x" +
                        std::to_string(output.cols()));
  }
  for (const auto& w : wrt) {
    check_owned(w, "grad");
  }
  std::vector<std::optional<Tracked>> acc(output.id() + 1);
  acc[output.id()] = scalar_constant(1.0);
  for (int id = output.id(); id >= 0; --id) {
    if (!acc[id] || !nodes_[id].requires_grad || !nodes_[id].backward) {
      continue;
    }
    // Copies: recording below may reallocate nodes_.
    const Backward backward = nodes_[id].backward;
    const std::vector<Tracked> inputs = nodes_[id].inputs;
    const char* op = nodes_[id].op;
    const Grads input_grads =
      backward(*this, Tracked(this, id, generation_), *acc[id]);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (!input_grads[k] || !nodes_[inputs[k].id()].requires_grad) {
        continue;
      }
      if (!input_grads[k]->value().allFinite()) {
        throw NumericalError(std::string("non-finite gradient through ") + op);
      }
      auto& slot = acc[inputs[k].id()];
      slot = slot ? add(*slot, *input_grads[k]) : *input_grads[k];
    }
  }
  std::vector<Tracked> out;
  out.reserve(wrt.size());
  for (const auto& w : wrt) {
    if (w.id() <= output.id() && acc[w.id()]) {
      out.push_back(*acc[w.id()]);
    } else {
      out.push_back(constant(Matrix::Zero(w.rows(), w.cols())));
    }
  }
  return out;
}

std::vector<Matrix> Tape::grad_values(const Tracked& output,
                                      std::span<const Tracked> wrt) {
  const auto grads = grad(output, wrt);
  std::vector<Matrix> out;
  out.reserve(grads.size());
  for (const auto& g : grads) {
    out.push_back(g.value());
  }
  return out;
}

Tracked matmul(const Tracked& a, const Tracked& b) {
  Tape& t = common_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul: inner dimensions differ (" +
                        std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + ")");
  }
  Matrix v = a.value() * b.value();
  return t.record("matmul", std::move(v), {a, b},
                  [a, b](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    Grads out(2);
                    if (a.requires_grad()) {
                      out[0] = matmul(g, transpose(b));
                    }
                    if (b.requires_grad()) {
                      out[1] = matmul(transpose(a), g);
                    }
                    return out;
                  });
}

Tracked transpose(const Tracked& a) {
  Tape& t = tape_of(a, "transpose");
  Matrix v = a.value().transpose();
  return t.record("transpose", std::move(v), {a},
                  [](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {transpose(g)};
                  });
}

namespace {

Tracked spmm_with_transpose(std::shared_ptr<const SparseMatrix> a,
                            std::shared_ptr<const SparseMatrix> at,
                            const Tracked& x) {
  Tape& t = tape_of(x, "spmm");
  if (a->cols() != x.rows()) {
    throw ArgumentError("spmm: sparse operand has " + std::to_string(a->cols()) +
                        " columns, dense operand has " +
                        std::to_string(x.rows()) + " rows");
  }
  Matrix v = ausrec::spmm(*a, x.value());
  return t.record("spmm", std::move(v), {x},
                  [a, at](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {spmm_with_transpose(at, a, g)};
                  });
}

}  // namespace

Tracked spmm(std::shared_ptr<const SparseMatrix> a, const Tracked& x) {
  auto at = a->is_symmetric()
              ? a
              : std::make_shared<const SparseMatrix>(a->transpose());
  return spmm_with_transpose(std::move(a), std::move(at), x);
}

Tracked add(const Tracked& a, const Tracked& b) {
  Tape& t = common_tape(a, b, "add");
  require_same_shape(a, b, "add");
  Matrix v = a.value() + b.value();
  return t.record("add", std::move(v), {a, b},
                  [](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {g, g};
                  });
}

Tracked sub(const Tracked& a, const Tracked& b) {
  Tape& t = common_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  Matrix v = a.value() - b.value();
  return t.record("sub", std::move(v), {a, b},
                  [b](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    Grads out{g, std::nullopt};
                    if (b.requires_grad()) {
                      out[1] = scale(g, -1.0);
                    }
                    return out;
                  });
}

Tracked mul(const Tracked& a, const Tracked& b) {
  Tape& t = common_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  Matrix v = a.value().cwiseProduct(b.value());
  return t.record("mul", std::move(v), {a, b},
                  [a, b](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    Grads out(2);
                    if (a.requires_grad()) {
                      out[0] = mul(g, b);
                    }
                    if (b.requires_grad()) {
                      out[1] = mul(g, a);
                    }
                    return out;
                  });
}

Tracked scale(const Tracked& a, double c) {
  Tape& t = tape_of(a, "scale");
  Matrix v = c * a.value();
  return t.record("scale", std::move(v), {a},
                  [c](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {scale(g, c)};
                  });
}

Tracked add_scalar(const Tracked& a, double c) {
  Tape& t = tape_of(a, "add_scalar");
  Matrix v = a.value().array() + c;
  return t.record("add_scalar", std::move(v), {a},
                  [](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {g};
                  });
}

Tracked concat_cols(const Tracked& a, const Tracked& b) {
  Tape& t = common_tape(a, b, "concat_cols");
  if (a.rows() != b.rows()) {
    throw ArgumentError("concat_cols: row counts differ");
  }
  Matrix v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  const Index ca = a.cols();
  const Index cb = b.cols();
  return t.record("concat_cols", std::move(v), {a, b},
                  [ca, cb](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {slice_cols(g, 0, ca), slice_cols(g, ca, cb)};
                  });
}

Tracked slice_cols(const Tracked& a, Index begin, Index count) {
  Tape& t = tape_of(a, "slice_cols");
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw ArgumentError("slice_cols: range outside operand");
  }
  Matrix v = a.value().middleCols(begin, count);
  const Index total = a.cols();
  return t.record(
    "slice_cols", std::move(v), {a},
    [begin, total](Tape&, const Tracked&, const Tracked& g) -> Grads {
      return {pad_cols(g, begin, total)};
    });
}

Tracked pad_cols(const Tracked& a, Index begin, Index total) {
  Tape& t = tape_of(a, "pad_cols");
  if (begin < 0 || begin + a.cols() > total) {
    throw ArgumentError("pad_cols: operand does not fit");
  }
  Matrix v = Matrix::Zero(a.rows(), total);
  v.middleCols(begin, a.cols()) = a.value();
  const Index count = a.cols();
  return t.record(
    "pad_cols", std::move(v), {a},
    [begin, count](Tape&, const Tracked&, const Tracked& g) -> Grads {
      return {slice_cols(g, begin, count)};
    });
}

Tracked gather_rows(const Tracked& a,
                    std::shared_ptr<const std::vector<Index>> rows) {
  Tape& t = tape_of(a, "gather_rows");
  const Matrix& src = a.value();
  Matrix v(static_cast<Index>(rows->size()), src.cols());
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const Index r = (*rows)[i];
    if (r < 0 || r >= src.rows()) {
      throw ArgumentError("gather_rows: row index " + std::to_string(r) +
                          " out of range");
    }
    v.row(static_cast<Index>(i)) = src.row(r);
  }
  const Index n = src.rows();
  return t.record("gather_rows", std::move(v), {a},
                  [rows, n](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {scatter_add_rows(g, rows, n)};
                  });
}

Tracked scatter_add_rows(const Tracked& a,
                         std::shared_ptr<const std::vector<Index>> rows,
                         Index out_rows) {
  Tape& t = tape_of(a, "scatter_add_rows");
  if (static_cast<Index>(rows->size()) != a.rows()) {
    throw ArgumentError("scatter_add_rows: index count differs from rows");
  }
  const Matrix& src = a.value();
  Matrix v = Matrix::Zero(out_rows, src.cols());
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const Index r = (*rows)[i];
    if (r < 0 || r >= out_rows) {
      throw ArgumentError("scatter_add_rows: row index out of range");
    }
    v.row(r) += src.row(static_cast<Index>(i));
  }
  return t.record("scatter_add_rows", std::move(v), {a},
                  [rows](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {gather_rows(g, rows)};
                  });
}

Tracked fill(const Tracked& s, Index rows, Index cols) {
  Tape& t = tape_of(s, "fill");
  Matrix v = Matrix::Constant(rows, cols, s.scalar());
  return t.record("fill", std::move(v), {s},
                  [](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {sum(g)};
                  });
}

Tracked broadcast_cols(const Tracked& a, Index cols) {
  Tape& t = tape_of(a, "broadcast_cols");
  if (a.cols() != 1) {
    throw ArgumentError("broadcast_cols: operand must be a column");
  }
  Matrix v = a.value().replicate(1, cols);
  return t.record("broadcast_cols", std::move(v), {a},
                  [](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {row_sum(g)};
                  });
}

Tracked broadcast_rows(const Tracked& a, Index rows) {
  Tape& t = tape_of(a, "broadcast_rows");
  if (a.rows() != 1) {
    throw ArgumentError("broadcast_rows: operand must be a row");
  }
  Matrix v = a.value().replicate(rows, 1);
  return t.record("broadcast_rows", std::move(v), {a},
                  [](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {col_sum(g)};
                  });
}

Tracked sigmoid(const Tracked& a) {
  Tape& t = tape_of(a, "sigmoid");
  Matrix v = a.value().unaryExpr([](double x) { return stable_sigmoid(x); });
  return t.record("sigmoid", std::move(v), {a},
                  [](Tape&, const Tracked& out, const Tracked& g) -> Grads {
                    // s (1 - s)
                    const Tracked slope =
                      mul(out, add_scalar(scale(out, -1.0), 1.0));
                    return {mul(g, slope)};
                  });
}

Tracked log_sigmoid(const Tracked& a) {
  Tape& t = tape_of(a, "log_sigmoid");
  Matrix v =
    a.value().unaryExpr([](double x) { return stable_log_sigmoid(x); });
  return t.record("log_sigmoid", std::move(v), {a},
                  [a](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {mul(g, sigmoid(scale(a, -1.0)))};
                  });
}

Tracked relu(const Tracked& a) {
  Tape& t = tape_of(a, "relu");
  Matrix v = a.value().cwiseMax(0.0);
  Matrix mask = (a.value().array() > 0.0).cast<double>().matrix();
  auto shared_mask = std::make_shared<const Matrix>(std::move(mask));
  return t.record(
    "relu", std::move(v), {a},
    [shared_mask](Tape& tape, const Tracked&, const Tracked& g) -> Grads {
      // The mask is piecewise constant, so its own derivative is zero.
      return {mul(g, tape.constant(*shared_mask))};
    });
}

Tracked sum(const Tracked& a) {
  Tape& t = tape_of(a, "sum");
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  const Index r = a.rows();
  const Index c = a.cols();
  return t.record("sum", std::move(v), {a},
                  [r, c](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {fill(g, r, c)};
                  });
}

Tracked mean(const Tracked& a) {
  if (a.value().size() == 0) {
    throw ArgumentError("mean of an empty tensor");
  }
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Tracked row_sum(const Tracked& a) {
  Tape& t = tape_of(a, "row_sum");
  Matrix v = a.value().rowwise().sum();
  const Index c = a.cols();
  return t.record("row_sum", std::move(v), {a},
                  [c](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {broadcast_cols(g, c)};
                  });
}

Tracked col_sum(const Tracked& a) {
  Tape& t = tape_of(a, "col_sum");
  Matrix v = a.value().colwise().sum();
  const Index r = a.rows();
  return t.record("col_sum", std::move(v), {a},
                  [r](Tape&, const Tracked&, const Tracked& g) -> Grads {
                    return {broadcast_rows(g, r)};
                  });
}

std::vector<Matrix> grad_through_update(const InnerObjective& inner,
                                        const OuterObjective& outer,
                                        const Matrix& w,
                                        std::span<const Matrix> theta,
                                        double alpha) {
  Tape tape;
  const Tracked w_var = tape.variable(w);
  std::vector<Tracked> theta_vars;
  theta_vars.reserve(theta.size());
  for (const auto& p : theta) {
    theta_vars.push_back(tape.variable(p));
  }
  const Tracked inner_loss = inner(tape, w_var, theta_vars);
  const Tracked inner_grad = tape.grad(inner_loss, std::span(&w_var, 1))[0];
  const Tracked w_hat = sub(w_var, scale(inner_grad, alpha));
  const Tracked outer_loss = outer(tape, w_hat);
  return tape.grad_values(outer_loss, theta_vars);
}

}  // namespace ausrec::ad
