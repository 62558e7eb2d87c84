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

#include <ausrec/common.hpp>

#include <cstdint>

namespace ausrec {

// Adam with bias correction, one instance per parameter tensor.
class Adam {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  Adam(Index rows, Index cols, Options options);
  Adam(Index rows, Index cols) : Adam(rows, cols, Options{}) {}

  // param <- param - lr * m_hat / (sqrt(v_hat) + eps)
  void step(Matrix& param, const Matrix& grad, double lr);

  std::int64_t steps() const { return t_; }
  const Matrix& first_moment() const { return m_; }
  const Matrix& second_moment() const { return v_; }

 private:
  Options options_;
  Matrix m_;
  Matrix v_;
  std::int64_t t_ = 0;
};

}  // namespace ausrec
