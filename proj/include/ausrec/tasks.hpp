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

#include <ausrec/sparse.hpp>

#include <array>
#include <string_view>
#include <vector>

namespace ausrec {

inline constexpr int kNumTasks = 7;

// Self-supervised auxiliary tasks over user pairs. The enumerator values are
// the fixed 1-based task indices ssl1..ssl7.
enum class TaskKind : int {
  SocialTriangle = 1,
  JointTriangle = 2,
  Hop1 = 3,
  Hop2 = 4,
  Hop3 = 5,
  MetaUVU = 6,
  MetaUUVU = 7,
};

inline constexpr std::array<TaskKind, kNumTasks> kAllTasks = {
  TaskKind::SocialTriangle, TaskKind::JointTriangle, TaskKind::Hop1,
  TaskKind::Hop2,           TaskKind::Hop3,          TaskKind::MetaUVU,
  TaskKind::MetaUUVU};

constexpr int task_index(TaskKind kind) { return static_cast<int>(kind); }
// Throws ArgumentError outside 1..7.
TaskKind task_from_index(int index);
std::string_view task_name(TaskKind kind);

// Positive user pairs of one auxiliary task. Zero diagonal; symmetric for
// every kind except MetaUUVU.
struct RelationSet {
  TaskKind task;
  SparseMatrix pairs;

  Index positive_count() const { return pairs.nnz(); }
};

RelationSet mine_task(const Dataset& d, TaskKind task);

// All seven tasks in index order. Each count goes to the info log; tasks with
// no positives are kept and reported as warnings.
std::vector<RelationSet> mine_all(const Dataset& d);

}  // namespace ausrec
