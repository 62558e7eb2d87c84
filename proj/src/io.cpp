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

#include <ausrec/io.hpp>

#include <ausrec/log.hpp>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ausrec::io {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

Index IdMap::get_or_add(const std::string& name) {
  const auto [it, inserted] = index_.try_emplace(name, size());
  if (inserted) {
    names_.push_back(name);
  }
  return it->second;
}

std::optional<Index> IdMap::find(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

DatasetStats compute_stats(const Dataset& d) {
  DatasetStats s;
  s.users = d.m;
  s.items = d.n;
  s.interactions = d.R.nnz();
  s.connections = d.S.nnz() / 2;
  const double m = static_cast<double>(d.m);
  s.density_r = static_cast<double>(s.interactions) / (m * static_cast<double>(d.n));
  s.density_s_undirected = static_cast<double>(s.connections) / (m * m);
  s.density_s_directed = static_cast<double>(d.S.nnz()) / (m * m);
  return s;
}

std::string stats_json(const DatasetStats& s) {
  json j = {{"users", s.users},
            {"items", s.items},
            {"interactions", s.interactions},
            {"connections", s.connections},
            {"density_r", s.density_r},
            {"density_s_undirected", s.density_s_undirected},
            {"density_s_directed", s.density_s_directed}};
  return j.dump(2);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) {
    fields.push_back(f);
  }
  return fields;
}

bool skip_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, mode);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

}  // namespace

LoadedDataset load_dataset(const std::filesystem::path& interactions,
                           const std::optional<std::filesystem::path>& social) {
  LoadedDataset out;
  std::vector<std::pair<Index, Index>> r;
  {
    std::ifstream in = open_input(interactions);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (skip_line(line)) {
        continue;
      }
      const auto f = split_fields(line);
      if (f.size() < 2 || f.size() > 3) {
        throw ParseError(interactions.string() + ":" + std::to_string(lineno) +
                           ": expected user, item and optional rating",
                         lineno);
      }
      if (f.size() == 3) {
        char* end = nullptr;
        std::strtod(f[2].c_str(), &end);
        if (end == f[2].c_str() || *end != '\0') {
          throw ParseError(interactions.string() + ":" +
                             std::to_string(lineno) + ": rating is not a number",
                           lineno);
        }
      }
      r.emplace_back(out.users.get_or_add(f[0]), out.items.get_or_add(f[1]));
    }
  }
  std::vector<std::pair<Index, Index>> s;
  if (social) {
    std::ifstream in = open_input(*social);
    std::string line;
    std::size_t lineno = 0;
    Index added = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (skip_line(line)) {
        continue;
      }
      const auto f = split_fields(line);
      if (f.size() != 2) {
        throw ParseError(social->string() + ":" + std::to_string(lineno) +
                           ": expected two user ids",
                         lineno);
      }
      Index ids[2];
      for (int k = 0; k < 2; ++k) {
        const auto known = out.users.find(f[k]);
        if (!known) {
          ++added;
        }
        ids[k] = known ? *known : out.users.get_or_add(f[k]);
      }
      if (ids[0] != ids[1]) {
        s.emplace_back(ids[0], ids[1]);
        s.emplace_back(ids[1], ids[0]);
      }
    }
    if (added > 0) {
      log::warn(std::to_string(added) +
                " users appear only in the social file; they have no "
                "interactions");
    }
  }
  const Index m = out.users.size();
  const Index n = out.items.size();
  out.data = Dataset{m, n, SparseMatrix::from_pattern(m, n, std::move(r)),
                     SparseMatrix::from_pattern(m, m, std::move(s))};
  out.data.validate();
  return out;
}

namespace {

// Line orders for the canonical edge lists. Ids get dense indices in order of
// first appearance, so lines are arranged such that every user and item is
// first mentioned in index order; reloading the files then reproduces the same
// indices. Each edge is written when its later endpoint becomes known.
std::vector<std::pair<Index, Index>> interaction_order(const Dataset& d) {
  const SparseMatrix rt = d.R.transpose();
  std::vector<std::pair<Index, Index>> out;
  out.reserve(d.R.nnz());
  Index nu = 0;
  Index nv = 0;
  const auto first_or = [](std::span<const Index> cols, Index fallback) {
    return cols.empty() ? fallback : cols.front();
  };
  const auto add_user = [&](Index skip) {
    for (const Index v : d.R.row_cols(nu)) {
      if (v < nv && v != skip) {
        out.emplace_back(nu, v);
      }
    }
    ++nu;
  };
  const auto add_item = [&](Index skip) {
    for (const Index u : rt.row_cols(nv)) {
      if (u < nu && u != skip) {
        out.emplace_back(u, nv);
      }
    }
    ++nv;
  };
  while (nv < d.n || (nu < d.m && d.R.row_nnz(nu) > 0)) {
    const Index a = nu < d.m ? first_or(d.R.row_cols(nu), d.n) : d.n;
    const Index b = nv < d.n ? first_or(rt.row_cols(nv), d.m) : d.m;
    if (a < nv) {
      out.emplace_back(nu, a);
      add_user(a);
    } else if (b < nu) {
      out.emplace_back(b, nv);
      add_item(b);
    } else if (a == nv && a < d.n) {
      out.emplace_back(nu, nv);
      add_user(-1);
      add_item(nu - 1);
    } else {
      break;  // ids were not assigned by first appearance
    }
  }
  if (static_cast<Index>(out.size()) != d.R.nnz()) {
    return d.R.coordinates();
  }
  return out;
}

std::vector<std::pair<Index, Index>> social_order(const Dataset& d) {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(d.S.nnz() / 2);
  // Users with interactions are already known from the interactions file.
  Index next = 0;
  while (next < d.m && d.R.row_nnz(next) > 0) {
    ++next;
  }
  for (Index u = 0; u < next; ++u) {
    for (const Index w : d.S.row_cols(u)) {
      if (w > u && w < next) {
        out.emplace_back(u, w);
      }
    }
  }
  const auto add_user = [&](Index skip) {
    for (const Index w : d.S.row_cols(next)) {
      if (w < next && w != skip) {
        out.emplace_back(w, next);
      }
    }
    ++next;
  };
  while (next < d.m) {
    const auto nbrs = d.S.row_cols(next);
    if (nbrs.empty()) {
      break;
    }
    if (nbrs.front() < next) {
      out.emplace_back(nbrs.front(), next);
      add_user(nbrs.front());
    } else if (nbrs.front() == next + 1) {
      out.emplace_back(next, next + 1);
      add_user(-1);
      add_user(next - 1);
    } else {
      break;
    }
  }
  if (static_cast<Index>(out.size()) * 2 != d.S.nnz()) {
    out.clear();
    for (const auto& [u, w] : d.S.coordinates()) {
      if (u < w) {
        out.emplace_back(u, w);
      }
    }
  }
  return out;
}

}  // namespace

void write_interactions(const std::filesystem::path& path,
                        const LoadedDataset& d) {
  std::ofstream out = open_output(path);
  for (const auto& [u, v] : interaction_order(d.data)) {
    out << d.users.name(u) << '\t' << d.items.name(v) << '\n';
  }
}

void write_social(const std::filesystem::path& path, const LoadedDataset& d) {
  std::ofstream out = open_output(path);
  for (const auto& [u, w] : social_order(d.data)) {
    out << d.users.name(u) << '\t' << d.users.name(w) << '\n';
  }
}

void write_relation(const std::filesystem::path& path, const RelationSet& rel,
                    const IdMap& users) {
  std::ofstream out = open_output(path);
  for (const auto& [u, w] : rel.pairs.coordinates()) {
    out << users.name(u) << '\t' << users.name(w) << '\n';
  }
}

std::string relation_summary_json(const std::vector<RelationSet>& rels) {
  json arr = json::array();
  for (const auto& rel : rels) {
    arr.push_back({{"task_index", task_index(rel.task)},
                   {"kind", std::string(task_name(rel.task))},
                   {"positive_count", rel.positive_count()}});
  }
  return arr.dump(2);
}

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) {
    throw std::runtime_error("truncated checkpoint " + path.string());
  }
  return v;
}

void put_doubles(std::ostream& out, const double* data, Index count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void get_doubles(std::istream& in, double* data, Index count,
                 const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) {
    throw std::runtime_error("truncated checkpoint " + path.string());
  }
}

void check_magic(std::istream& in, const char* magic,
                 const std::filesystem::path& path) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) {
    throw std::runtime_error(path.string() + " is not a " +
                             std::string(magic, 8) + " checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != 1) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
}

}  // namespace

void save_embeddings(const std::filesystem::path& path,
                     const EmbeddingTable& emb) {
  std::ofstream out = open_output(path, std::ios::binary);
  out.write("AUSRECK1", 8);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, 0);
  put<std::int64_t>(out, emb.m);
  put<std::int64_t>(out, emb.n);
  put<std::int64_t>(out, emb.dim());
  put<std::int64_t>(out, emb.layers);
  put_doubles(out, emb.e0.data(), emb.e0.size());
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  check_magic(in, "AUSRECK1", path);
  get<std::uint32_t>(in, path);
  EmbeddingTable emb;
  emb.m = get<std::int64_t>(in, path);
  emb.n = get<std::int64_t>(in, path);
  const auto d = get<std::int64_t>(in, path);
  emb.layers = static_cast<int>(get<std::int64_t>(in, path));
  if (emb.m < 1 || emb.n < 1 || d < 1 || emb.layers < 1) {
    throw std::runtime_error("corrupt checkpoint header in " + path.string());
  }
  emb.e0.resize(emb.m + emb.n, d);
  get_doubles(in, emb.e0.data(), emb.e0.size(), path);
  return emb;
}

void save_weight_net(const std::filesystem::path& path,
                     const WeightNetParams& theta) {
  std::ofstream out = open_output(path, std::ios::binary);
  out.write("AUSRECT1", 8);
  put<std::uint32_t>(out, 1);
  const auto widths = theta.widths();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(widths.size()));
  for (const Index w : widths) {
    put<std::int64_t>(out, w);
  }
  for (const auto& layer : theta.layers) {
    put_doubles(out, layer.weight.data(), layer.weight.size());
    put_doubles(out, layer.bias.data(), layer.bias.size());
  }
}

WeightNetParams load_weight_net(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  check_magic(in, "AUSRECT1", path);
  const auto count = get<std::uint32_t>(in, path);
  std::vector<Index> widths(count);
  for (auto& w : widths) {
    w = get<std::int64_t>(in, path);
  }
  WeightNetParams theta = WeightNetParams::zeros(widths);
  for (auto& layer : theta.layers) {
    get_doubles(in, layer.weight.data(), layer.weight.size(), path);
    get_doubles(in, layer.bias.data(), layer.bias.size(), path);
  }
  return theta;
}

std::string hyperparams_json(const Hyperparams& hp, const RunMode& mode,
                             const std::string& interactions,
                             const std::string& social) {
  json j = {{"interactions", interactions},
            {"social", social},
            {"mode", mode.to_string()},
            {"batch_size", hp.batch_size},
            {"lr", hp.lr},
            {"mlr", hp.meta_lr},
            {"l2", hp.l2},
            {"dim", hp.dim},
            {"layers", hp.layers},
            {"arch", format_architecture(hp.arch)},
            {"epochs", hp.epochs},
            {"meta_fraction", hp.meta_fraction},
            {"seed", hp.seed},
            {"train_parts", hp.train_parts},
            {"test_parts", hp.test_parts},
            {"patience", hp.patience},
            {"init_std", hp.init_std},
            {"k_max", hp.k_max}};
  return j.dump(2);
}

RunConfig parse_run_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  RunConfig c;
  c.interactions = j.at("interactions").get<std::string>();
  c.social = j.at("social").get<std::string>();
  c.mode = RunMode::parse(j.at("mode").get<std::string>());
  c.hp.batch_size = j.at("batch_size").get<Index>();
  c.hp.lr = j.at("lr").get<double>();
  c.hp.meta_lr = j.at("mlr").get<double>();
  c.hp.l2 = j.at("l2").get<double>();
  c.hp.dim = j.at("dim").get<Index>();
  c.hp.layers = j.at("layers").get<int>();
  c.hp.arch = parse_architecture(j.at("arch").get<std::string>());
  c.hp.epochs = j.at("epochs").get<int>();
  c.hp.meta_fraction = j.at("meta_fraction").get<double>();
  c.hp.seed = j.at("seed").get<std::uint64_t>();
  c.hp.train_parts = j.at("train_parts").get<int>();
  c.hp.test_parts = j.at("test_parts").get<int>();
  c.hp.patience = j.at("patience").get<int>();
  c.hp.init_std = j.at("init_std").get<double>();
  c.hp.k_max = j.at("k_max").get<Index>();
  c.hp.validate();
  return c;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochRecord>& history) {
  std::ofstream out = open_output(path);
  out << "epoch,recall@5,recall@10,recall@20,ndcg@5,ndcg@10,ndcg@20\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& rec : history) {
    out << rec.epoch;
    for (const auto* table : {&rec.metrics.recall, &rec.metrics.ndcg}) {
      for (const Index k : kReportedCutoffs) {
        out << ',';
        if (const auto it = table->find(k); it != table->end()) {
          out << it->second;
        }
      }
    }
    out << '\n';
  }
}

void write_weights_csv(
  const std::filesystem::path& path,
  const std::vector<std::array<double, kNumTasks>>& log) {
  std::ofstream out = open_output(path);
  out << "step";
  for (int s = 1; s <= kNumTasks; ++s) {
    out << ",ssl" << s;
  }
  out << '\n' << std::setprecision(6) << std::fixed;
  for (std::size_t step = 0; step < log.size(); ++step) {
    out << step + 1;
    for (const double w : log[step]) {
      out << ',';
      if (!std::isnan(w)) {
        out << w;
      }
    }
    out << '\n';
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
}

}  // namespace ausrec::io
