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

#include <ausrec/tasks.hpp>

#include <ausrec/log.hpp>

#include <string>

namespace ausrec {

TaskKind task_from_index(int index) {
  if (index < 1 || index > kNumTasks) {
    throw ArgumentError("task index must be in 1..7, got " +
                        std::to_string(index));
  }
  return static_cast<TaskKind>(index);
}

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::SocialTriangle: return "social_triangle";
    case TaskKind::JointTriangle: return "joint_triangle";
    case TaskKind::Hop1: return "hop1";
    case TaskKind::Hop2: return "hop2";
    case TaskKind::Hop3: return "hop3";
    case TaskKind::MetaUVU: return "meta_uvu";
    case TaskKind::MetaUUVU: return "meta_uuvu";
  }
  return "unknown";
}

namespace {

// Users sharing at least one item (R R^T, diagonal included).
SparseMatrix co_interaction(const Dataset& d) {
  return bool_product(d.R, d.R.transpose());
}

}  // namespace

RelationSet mine_task(const Dataset& d, TaskKind task) {
  d.validate();
  SparseMatrix pairs;
  switch (task) {
    case TaskKind::SocialTriangle:
      pairs = hadamard_mask(bool_product(d.S, d.S), d.S);
      break;
    case TaskKind::JointTriangle:
      pairs = hadamard_mask(co_interaction(d), d.S);
      break;
    case TaskKind::Hop1:
      pairs = exact_k_hop(d.S, 1);
      break;
    case TaskKind::Hop2:
      pairs = exact_k_hop(d.S, 2);
      break;
    case TaskKind::Hop3:
      pairs = exact_k_hop(d.S, 3);
      break;
    case TaskKind::MetaUVU:
      pairs = co_interaction(d);
      break;
    case TaskKind::MetaUUVU:
      // u -> u' (social) -> v -> u'' collapses to the endpoint pair (u, u'').
      pairs = bool_product(d.S, co_interaction(d));
      break;
  }
  return RelationSet{task, pairs.without_diagonal().binarized()};
}

std::vector<RelationSet> mine_all(const Dataset& d) {
  std::vector<RelationSet> out;
  out.reserve(kNumTasks);
  for (const TaskKind kind : kAllTasks) {
    out.push_back(mine_task(d, kind));
    const auto& set = out.back();
    const std::string label = "ssl" + std::to_string(task_index(kind)) + " (" +
                              std::string(task_name(kind)) + ")";
    log::info(label + ": " + std::to_string(set.positive_count()) +
              " positive pairs");
    if (set.positive_count() == 0) {
      log::warn(label + " has no positive pairs; its loss contribution is zero");
    }
  }
  return out;
}

}  // namespace ausrec
