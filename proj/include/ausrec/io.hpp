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

// File formats.
//
// Interactions: one `user<TAB>item[<TAB>rating]` per line. Social links: one
// `user<TAB>user` per line. Any run of spaces/tabs separates fields; blank
// lines and lines starting with '#' are ignored. Ids are arbitrary strings,
// remapped to dense indices in order of first appearance.
//
// Embedding checkpoint (little-endian):
//   char[8]  "AUSRECK1"
//   uint32   format version (1)
//   uint32   reserved (0)
//   int64    m, n, d, K
//   float64  e0[(m + n) * d], row-major, users first
//
// Weighting-network checkpoint (little-endian):
//   char[8]  "AUSRECT1"
//   uint32   format version (1)
//   uint32   number of widths L
//   int64    widths[L]
//   per layer: float64 weight[in * out] row-major, float64 bias[out]

#include <ausrec/sparse.hpp>
#include <ausrec/tasks.hpp>
#include <ausrec/trainer.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ausrec::io {

class IdMap {
 public:
  Index get_or_add(const std::string& name);
  std::optional<Index> find(const std::string& name) const;
  const std::string& name(Index idx) const { return names_.at(idx); }
  Index size() const { return static_cast<Index>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

struct DatasetStats {
  Index users = 0;
  Index items = 0;
  Index interactions = 0;
  Index connections = 0;  // undirected social edges
  double density_r = 0.0;                // interactions / (m n)
  double density_s_undirected = 0.0;     // connections / m^2
  double density_s_directed = 0.0;       // stored entries / m^2
};

DatasetStats compute_stats(const Dataset& d);
std::string stats_json(const DatasetStats& s);

struct LoadedDataset {
  Dataset data;
  IdMap users;
  IdMap items;
};

// Throws ParseError (with line number) on a malformed line.
LoadedDataset load_dataset(const std::filesystem::path& interactions,
                           const std::optional<std::filesystem::path>& social);

// Canonical edge lists, each undirected social edge written once. Lines are
// ordered so that reloading the two files reproduces the same dense indices.
void write_interactions(const std::filesystem::path& path,
                        const LoadedDataset& d);
void write_social(const std::filesystem::path& path, const LoadedDataset& d);

// One `u<TAB>u'` line per positive pair, original user ids.
void write_relation(const std::filesystem::path& path, const RelationSet& rel,
                    const IdMap& users);
std::string relation_summary_json(const std::vector<RelationSet>& rels);

void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingTable& emb);
EmbeddingTable load_embeddings(const std::filesystem::path& path);
void save_weight_net(const std::filesystem::path& path,
                     const WeightNetParams& theta);
WeightNetParams load_weight_net(const std::filesystem::path& path);

std::string hyperparams_json(const Hyperparams& hp, const RunMode& mode,
                             const std::string& interactions,
                             const std::string& social);
struct RunConfig {
  Hyperparams hp;
  RunMode mode;
  std::string interactions;
  std::string social;
};
RunConfig parse_run_config(const std::string& json_text);

// metrics.csv: epoch,recall@5,recall@10,recall@20,ndcg@5,ndcg@10,ndcg@20
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochRecord>& history);
// weights.csv: step,ssl1..ssl7 (blank where a task was inactive)
void write_weights_csv(
  const std::filesystem::path& path,
  const std::vector<std::array<double, kNumTasks>>& log);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ausrec::io
