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

#include <ausrec/optim.hpp>

#include <cmath>

namespace ausrec {

Adam::Adam(Index rows, Index cols, Options options)
  : options_(options),
    m_(Matrix::Zero(rows, cols)),
    v_(Matrix::Zero(rows, cols)) {}

void Adam::step(Matrix& param, const Matrix& grad, double lr) {
  if (param.rows() != m_.rows() || param.cols() != m_.cols() ||
      grad.rows() != m_.rows() || grad.cols() != m_.cols()) {
    throw ArgumentError("Adam: parameter/gradient shape mismatch");
  }
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * grad;
  v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  param.array() -=
    lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + options_.eps);
}

}  // namespace ausrec
