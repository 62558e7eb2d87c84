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

#include <ausrec/loss.hpp>

#include <memory>

namespace ausrec {

BatchNodes batch_nodes(const TripletBatch& b, Index m) {
  BatchNodes nodes{b.anchors, b.positives, b.negatives};
  if (b.is_primary()) {
    for (auto& v : nodes.positives) {
      v += m;
    }
    for (auto& v : nodes.negatives) {
      v += m;
    }
  }
  return nodes;
}

namespace {

void check_batch(const PropagatedEmbeddings& p, const TripletBatch& b) {
  const Index limit = b.is_primary() ? p.n : p.m;
  for (Index i = 0; i < b.size(); ++i) {
    if (b.anchors[i] < 0 || b.anchors[i] >= p.m || b.positives[i] < 0 ||
        b.positives[i] >= limit || b.negatives[i] < 0 ||
        b.negatives[i] >= limit) {
      throw ArgumentError("triplet batch index out of range");
    }
  }
}

}  // namespace

BprLoss bpr_loss(const PropagatedEmbeddings& p, const Matrix& e0,
                 const TripletBatch& b, double delta) {
  check_batch(p, b);
  const BatchNodes nodes = batch_nodes(b, p.m);
  const Matrix& e = p.e_final;
  BprLoss out{Vector(b.size()), 0.0};
  for (Index i = 0; i < b.size(); ++i) {
    const Index a = nodes.anchors[i];
    const Index pos = nodes.positives[i];
    const Index neg = nodes.negatives[i];
    const double x = e.row(a).dot(e.row(pos)) - e.row(a).dot(e.row(neg));
    const double reg = e0.row(a).squaredNorm() + e0.row(pos).squaredNorm() +
                       e0.row(neg).squaredNorm();
    out.per_sample(i) = -ad::stable_log_sigmoid(x) + delta * reg;
  }
  if (b.size() > 0) {
    out.mean = out.per_sample.mean();
  }
  return out;
}

void bpr_backward(const PropagatedEmbeddings& p, const Matrix& e0,
                  const TripletBatch& b, double delta, const Vector& coef,
                  Matrix& grad_final, Matrix& grad_e0) {
  if (coef.size() != b.size()) {
    throw ArgumentError("coefficient count differs from batch size");
  }
  const BatchNodes nodes = batch_nodes(b, p.m);
  const Matrix& e = p.e_final;
  for (Index i = 0; i < b.size(); ++i) {
    const Index a = nodes.anchors[i];
    const Index pos = nodes.positives[i];
    const Index neg = nodes.negatives[i];
    const double x = e.row(a).dot(e.row(pos)) - e.row(a).dot(e.row(neg));
    // d(-ln sigmoid(x))/dx = -sigmoid(-x)
    const double dx = -coef(i) * ad::stable_sigmoid(-x);
    grad_final.row(a) += dx * (e.row(pos) - e.row(neg));
    grad_final.row(pos) += dx * e.row(a);
    grad_final.row(neg) -= dx * e.row(a);
    const double dr = 2.0 * delta * coef(i);
    grad_e0.row(a) += dr * e0.row(a);
    grad_e0.row(pos) += dr * e0.row(pos);
    grad_e0.row(neg) += dr * e0.row(neg);
  }
}

Vector bpr_directional(const PropagatedEmbeddings& p, const Matrix& e0,
                       const Matrix& e_dot, const Matrix& h,
                       const TripletBatch& b, double delta) {
  const BatchNodes nodes = batch_nodes(b, p.m);
  const Matrix& e = p.e_final;
  Vector out(b.size());
  for (Index i = 0; i < b.size(); ++i) {
    const Index a = nodes.anchors[i];
    const Index pos = nodes.positives[i];
    const Index neg = nodes.negatives[i];
    const double x = e.row(a).dot(e.row(pos)) - e.row(a).dot(e.row(neg));
    const double x_dot = e_dot.row(a).dot(e.row(pos) - e.row(neg)) +
                         e.row(a).dot(e_dot.row(pos) - e_dot.row(neg));
    const double reg_dot = e0.row(a).dot(h.row(a)) +
                           e0.row(pos).dot(h.row(pos)) +
                           e0.row(neg).dot(h.row(neg));
    out(i) = -ad::stable_sigmoid(-x) * x_dot + 2.0 * delta * reg_dot;
  }
  return out;
}

ad::Tracked bpr_loss(const ad::Tracked& e_final, const ad::Tracked& e0,
                     const TripletBatch& b, Index m, double delta) {
  if (b.empty()) {
    throw ArgumentError("recorded BPR loss needs a nonempty batch");
  }
  const BatchNodes nodes = batch_nodes(b, m);
  const auto anchors = std::make_shared<const std::vector<Index>>(nodes.anchors);
  const auto positives =
    std::make_shared<const std::vector<Index>>(nodes.positives);
  const auto negatives =
    std::make_shared<const std::vector<Index>>(nodes.negatives);
  const ad::Tracked ea = ad::gather_rows(e_final, anchors);
  const ad::Tracked ep = ad::gather_rows(e_final, positives);
  const ad::Tracked en = ad::gather_rows(e_final, negatives);
  const ad::Tracked x = ad::row_sum(ad::mul(ea, ad::sub(ep, en)));
  ad::Tracked loss = ad::scale(ad::log_sigmoid(x), -1.0);
  if (delta != 0.0) {
    const auto sq = [](const ad::Tracked& t) {
      return ad::row_sum(ad::mul(t, t));
    };
    const ad::Tracked wa = ad::gather_rows(e0, anchors);
    const ad::Tracked wp = ad::gather_rows(e0, positives);
    const ad::Tracked wn = ad::gather_rows(e0, negatives);
    const ad::Tracked reg = ad::add(ad::add(sq(wa), sq(wp)), sq(wn));
    loss = ad::add(loss, ad::scale(reg, delta));
  }
  return loss;
}

}  // namespace ausrec
