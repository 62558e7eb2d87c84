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

// Reverse-mode differentiation over dense float64 matrices.
//
// Every primitive records its forward value together with a backward rule on
// a Tape. Backward rules are themselves written in terms of recorded
// primitives, so a gradient returned by Tape::grad is again a Tracked value
// and can be differentiated a second time. That is what lets the meta
// objective be differentiated through a one-step virtual parameter update.
//
// Sparse operands are constants; only dense Tracked values carry gradients.

#include <ausrec/common.hpp>
#include <ausrec/sparse.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ausrec::ad {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy. A handle is only valid
// for the tape generation it was created in.
class Tracked {
 public:
  Tracked() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  // Value of a 1x1 tracked scalar.
  double scalar() const;
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  std::uint64_t generation() const { return generation_; }

 private:
  friend class Tape;
  Tracked(Tape* tape, int id, std::uint64_t generation)
    : tape_(tape), id_(id), generation_(generation) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
  std::uint64_t generation_ = 0;
};

class Tape {
 public:
  // Returns input gradients (nullopt where an input needs none) given the
  // node's output handle and the incoming gradient.
  using Backward = std::function<std::vector<std::optional<Tracked>>(
    Tape&, const Tracked& out, const Tracked& grad)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tracked variable(Matrix value);
  Tracked constant(Matrix value);
  Tracked scalar_constant(double value);

  // Reverse sweep from a 1x1 output. The returned gradients are recorded on
  // this tape and can be differentiated again. An input that does not
  // influence the output gets a zero constant.
  std::vector<Tracked> grad(const Tracked& output,
                            std::span<const Tracked> wrt);
  // Same as grad but returns plain values.
  std::vector<Matrix> grad_values(const Tracked& output,
                                  std::span<const Tracked> wrt);

  // Drops every node and starts a new generation; old handles become invalid.
  void clear();

  std::size_t size() const { return nodes_.size(); }
  std::uint64_t generation() const { return generation_; }

  // Forward values are checked for NaN/inf after every primitive (default on).
  void set_check_finite(bool on) { check_finite_ = on; }

  // Low-level recording hook used by the primitives.
  Tracked record(const char* op, Matrix value, std::vector<Tracked> inputs,
                 Backward backward);

  const Matrix& value_of(int id) const { return nodes_[id].value; }
  bool requires_grad_of(int id) const { return nodes_[id].requires_grad; }
  void check_owned(const Tracked& t, const char* op) const;

 private:
  struct Node {
    const char* op;
    Matrix value;
    std::vector<Tracked> inputs;
    Backward backward;
    bool requires_grad;
  };

  std::vector<Node> nodes_;
  std::uint64_t generation_;
  bool check_finite_ = true;
};

// Dense algebra.
Tracked matmul(const Tracked& a, const Tracked& b);
Tracked transpose(const Tracked& a);
// Sparse constant times tracked dense.
Tracked spmm(std::shared_ptr<const SparseMatrix> a, const Tracked& x);

// Elementwise, operands of identical shape.
Tracked add(const Tracked& a, const Tracked& b);
Tracked sub(const Tracked& a, const Tracked& b);
Tracked mul(const Tracked& a, const Tracked& b);
Tracked scale(const Tracked& a, double c);
Tracked add_scalar(const Tracked& a, double c);

// Shape plumbing.
Tracked concat_cols(const Tracked& a, const Tracked& b);
Tracked slice_cols(const Tracked& a, Index begin, Index count);
Tracked pad_cols(const Tracked& a, Index begin, Index total);
Tracked gather_rows(const Tracked& a,
                    std::shared_ptr<const std::vector<Index>> rows);
Tracked scatter_add_rows(const Tracked& a,
                         std::shared_ptr<const std::vector<Index>> rows,
                         Index out_rows);
// 1x1 -> rows x cols, n x 1 -> n x cols, 1 x m -> rows x m.
Tracked fill(const Tracked& s, Index rows, Index cols);
Tracked broadcast_cols(const Tracked& a, Index cols);
Tracked broadcast_rows(const Tracked& a, Index rows);

// Nonlinearities.
Tracked sigmoid(const Tracked& a);
// Numerically stable log(sigmoid(x)).
Tracked log_sigmoid(const Tracked& a);
Tracked relu(const Tracked& a);

// Reductions.
Tracked sum(const Tracked& a);
Tracked mean(const Tracked& a);
Tracked row_sum(const Tracked& a);
Tracked col_sum(const Tracked& a);

// Builds the inner objective L(W, Theta) on the tape.
using InnerObjective = std::function<Tracked(
  Tape&, const Tracked& w, std::span<const Tracked> theta)>;
// Builds the outer objective at the virtually updated parameters.
using OuterObjective = std::function<Tracked(Tape&, const Tracked& w_hat)>;

// Gradient of outer(W - alpha * dL/dW (W, Theta)) with respect to Theta,
// obtained by differentiating through the recorded inner backward pass.
std::vector<Matrix> grad_through_update(const InnerObjective& inner,
                                        const OuterObjective& outer,
                                        const Matrix& w,
                                        std::span<const Matrix> theta,
                                        double alpha);

// Scalar helpers shared with the dense code paths.
double stable_sigmoid(double x);
double stable_log_sigmoid(double x);

}  // namespace ausrec::ad
