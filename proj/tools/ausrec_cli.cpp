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
#include <ausrec/kernels.hpp>
#include <ausrec/log.hpp>
#include <ausrec/tasks.hpp>
#include <ausrec/trainer.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ausrec;

namespace {

struct DataFlags {
  std::string interactions;
  std::string social;
};

struct TrainFlags {
  DataFlags data;
  Hyperparams hp;
  std::string mode = "full";
  std::string arch = "8-1000-1";
  std::string out = "run";
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool required) {
  auto* opt = cmd->add_option("--interactions", f.interactions,
                              "user<TAB>item[<TAB>rating] file");
  if (required) {
    opt->required()->check(CLI::ExistingFile);
  }
  cmd->add_option("--social", f.social, "user<TAB>user file")
    ->check(CLI::ExistingFile);
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  add_data_flags(cmd, f.data, true);
  cmd->add_option("--epochs", f.hp.epochs, "training epochs");
  cmd->add_option("--lr", f.hp.lr, "encoder learning rate");
  cmd->add_option("--mlr", f.hp.meta_lr, "weighting-network learning rate");
  cmd->add_option("--batch-size", f.hp.batch_size, "triplets per batch");
  cmd->add_option("--dim", f.hp.dim, "embedding width");
  cmd->add_option("--layers", f.hp.layers, "propagation layers");
  cmd->add_option("--meta-fraction", f.hp.meta_fraction,
                  "share of training interactions held out as meta data");
  cmd->add_option("--arch", f.arch, "weighting-network architecture")
    ->check(CLI::IsMember(supported_architectures()));
  cmd->add_option("--seed", f.hp.seed, "random seed");
  cmd->add_option("--l2", f.hp.l2, "embedding regularization");
  cmd->add_option("--patience", f.hp.patience, "early-stopping patience");
  cmd->add_option("--out", f.out, "output directory");
}

io::LoadedDataset load(const DataFlags& f) {
  std::optional<fs::path> social;
  if (!f.social.empty()) {
    social = f.social;
  }
  io::LoadedDataset d = io::load_dataset(f.interactions, social);
  log::info("dataset: " + io::stats_json(io::compute_stats(d.data)));
  return d;
}

std::string format_metrics(const MetricSet& m) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4);
  for (const Index k : kReportedCutoffs) {
    if (m.recall.count(k)) {
      ss << " R@" << k << "=" << m.recall.at(k);
    }
  }
  for (const Index k : kReportedCutoffs) {
    if (m.ndcg.count(k)) {
      ss << " N@" << k << "=" << m.ndcg.at(k);
    }
  }
  return ss.str();
}

// Trains one configuration and writes its run directory. Returns the metrics
// of the best epoch.
MetricSet run_training(const io::LoadedDataset& d, const TrainingData& data,
                       const Hyperparams& hp, const RunMode& mode,
                       const DataFlags& flags, const fs::path& out) {
  fs::create_directories(out);
  io::write_file(out / "config.json",
                 io::hyperparams_json(hp, mode, flags.interactions,
                                      flags.social));
  io::write_file(out / "stats.json",
                 io::stats_json(io::compute_stats(d.data)));
  TrainOptions options;
  options.on_epoch = [&](const EpochRecord& rec) {
    std::ostringstream ss;
    ss << "[" << mode.to_string() << "] epoch " << rec.epoch
       << " loss=" << std::setprecision(5) << rec.mean_objective
       << format_metrics(rec.metrics);
    log::info(ss.str());
  };
  TrainResult result = train(data, hp, mode, options);
  io::write_metrics_csv(out / "metrics.csv", result.history);
  if (mode.mode != Mode::PrimaryOnly) {
    io::write_weights_csv(out / "weights.csv", result.state.weight_log);
  }
  io::save_embeddings(out / "embeddings.ckpt", result.state.emb);
  if (mode.uses_weight_net()) {
    io::save_weight_net(out / "weight_net.ckpt", result.state.theta);
  }
  log::info("[" + mode.to_string() + "] " + result.stop_reason +
            "; best epoch " + std::to_string(result.best_epoch));
  if (result.diverged) {
    throw NumericalError("training diverged: " + result.stop_reason +
                         " (last good checkpoint written)");
  }
  for (const auto& rec : result.history) {
    if (rec.epoch == result.best_epoch) {
      return rec.metrics;
    }
  }
  return {};
}

int cmd_mine(const DataFlags& flags, const std::string& out) {
  const io::LoadedDataset d = load(flags);
  const auto rels = mine_all(d.data);
  const fs::path dir(out);
  for (const auto& rel : rels) {
    io::write_relation(dir / ("ssl" + std::to_string(task_index(rel.task)) +
                              "_" + std::string(task_name(rel.task)) + ".tsv"),
                       rel, d.users);
  }
  io::write_file(dir / "summary.json", io::relation_summary_json(rels));
  std::cout << io::relation_summary_json(rels) << '\n';
  return 0;
}

int cmd_train(TrainFlags& f) {
  f.hp.arch = parse_architecture(f.arch);
  f.hp.validate();
  const RunMode mode = RunMode::parse(f.mode);
  const io::LoadedDataset d = load(f.data);
  const TrainingData data = TrainingData::build(d.data, f.hp);
  const MetricSet best = run_training(d, data, f.hp, mode, f.data, f.out);
  std::cout << "best:" << format_metrics(best) << '\n';
  return 0;
}

int cmd_eval(const std::string& run, std::string checkpoint, DataFlags flags,
             Hyperparams hp, const std::string& split) {
  if (!run.empty()) {
    const io::RunConfig cfg =
      io::parse_run_config(io::read_file(fs::path(run) / "config.json"));
    hp = cfg.hp;
    if (flags.interactions.empty()) {
      flags.interactions = cfg.interactions;
      flags.social = cfg.social;
    }
    if (checkpoint.empty()) {
      checkpoint = (fs::path(run) / "embeddings.ckpt").string();
    }
  }
  if (checkpoint.empty() || flags.interactions.empty()) {
    throw ArgumentError("eval needs --run or --checkpoint with --interactions");
  }
  const io::LoadedDataset d = load(flags);
  const TrainingData data = TrainingData::build(d.data, hp);
  const EmbeddingTable emb = io::load_embeddings(checkpoint);
  if (emb.m != data.m || emb.n != data.n) {
    throw StructuralError("checkpoint shape does not match the dataset");
  }
  const SparseMatrix* held_out = &data.test_pattern;
  SparseMatrix mask = data.train_pattern;
  if (split == "meta") {
    held_out = &data.meta_pattern;
    mask = edges_to_matrix(data.m, data.n, data.split.train);
  } else if (split != "test") {
    throw ArgumentError("--split must be test or meta");
  }
  const PropagatedEmbeddings p = propagate(*data.a_hat, emb);
  const MetricSet m =
    compute_metrics(rank_all(p, mask, *held_out, hp.k_max));
  nlohmann::json j;
  for (const Index k : kReportedCutoffs) {
    j["recall@" + std::to_string(k)] = m.recall.at(k);
    j["ndcg@" + std::to_string(k)] = m.ndcg.at(k);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_ablate(TrainFlags& f, const std::string& suite) {
  f.hp.arch = parse_architecture(f.arch);
  f.hp.validate();
  const io::LoadedDataset d = load(f.data);
  const TrainingData data = TrainingData::build(d.data, f.hp);

  struct Variant {
    std::string name;
    RunMode mode;
    std::vector<Index> arch;
  };
  std::vector<Variant> variants;
  const bool all = suite == "all";
  if (all || suite == "no-aw") {
    variants.push_back({"full", RunMode::parse("full"), f.hp.arch});
    variants.push_back({"no-aw", RunMode::parse("no-aw"), f.hp.arch});
  }
  if (all || suite == "single-task") {
    for (const TaskKind t : kAllTasks) {
      const std::string s = std::to_string(task_index(t));
      variants.push_back({"ssl" + s + "-aw",
                          RunMode::parse("single-task:" + s), f.hp.arch});
      variants.push_back({"ssl" + s + "-no-aw",
                          RunMode::parse("single-task-no-aw:" + s), f.hp.arch});
    }
  }
  if (all || suite == "arch") {
    for (const auto& a : supported_architectures()) {
      variants.push_back({"arch-" + a, RunMode::parse("full"),
                          parse_architecture(a)});
    }
  }
  if (variants.empty()) {
    throw ArgumentError("unknown suite '" + suite +
                        "' (expected no-aw, single-task, arch or all)");
  }

  const fs::path out(f.out);
  std::ostringstream csv;
  std::ostringstream md;
  csv << "variant,mode,arch,recall@5,recall@10,recall@20,ndcg@5,ndcg@10,"
         "ndcg@20\n";
  md << "| variant | mode | arch | R@5 | R@10 | R@20 | N@5 | N@10 | N@20 |\n"
     << "|---|---|---|---|---|---|---|---|---|\n";
  csv << std::fixed << std::setprecision(4);
  md << std::fixed << std::setprecision(4);
  for (const auto& v : variants) {
    Hyperparams hp = f.hp;
    hp.arch = v.arch;
    const MetricSet m =
      run_training(d, data, hp, v.mode, f.data, out / v.name);
    const std::string arch = format_architecture(v.arch);
    csv << v.name << ',' << v.mode.to_string() << ',' << arch;
    md << "| " << v.name << " | " << v.mode.to_string() << " | " << arch;
    for (const auto* table : {&m.recall, &m.ndcg}) {
      for (const Index k : kReportedCutoffs) {
        const double value = table->count(k) ? table->at(k) : 0.0;
        csv << ',' << value;
        md << " | " << value;
      }
    }
    csv << '\n';
    md << " |\n";
  }
  io::write_file(out / "ablation.csv", csv.str());
  io::write_file(out / "ablation.md", md.str());
  std::cout << md.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  kernels::retain_freed_memory();
  kernels::configure_threads_from_env();
  CLI::App app{"AusRec: social recommendation with automatically weighted "
               "self-supervised auxiliary tasks"};
  app.require_subcommand(1);

  DataFlags mine_flags;
  std::string mine_out = "relations";
  auto* mine = app.add_subcommand("mine", "derive the auxiliary relation sets");
  add_data_flags(mine, mine_flags, true);
  mine->add_option("--out", mine_out, "output directory");

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train and evaluate a model");
  add_train_flags(train_cmd, train_flags);
  train_cmd->add_option("--mode", train_flags.mode,
                        "full | no-aw | single-task:<s> | "
                        "single-task-no-aw:<s> | primary-only");

  std::string eval_run;
  std::string eval_ckpt;
  std::string eval_split = "test";
  DataFlags eval_flags;
  Hyperparams eval_hp;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint");
  eval_cmd->add_option("--run", eval_run, "run directory written by train");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "embedding checkpoint");
  add_data_flags(eval_cmd, eval_flags, false);
  eval_cmd->add_option("--seed", eval_hp.seed, "seed used for the split");
  eval_cmd->add_option("--meta-fraction", eval_hp.meta_fraction,
                       "meta fraction used for the split");
  eval_cmd->add_option("--split", eval_split, "test | meta");

  TrainFlags ablate_flags;
  ablate_flags.out = "ablation";
  std::string suite = "all";
  auto* ablate = app.add_subcommand("ablate", "run an ablation suite");
  add_train_flags(ablate, ablate_flags);
  ablate->add_option("--suite", suite, "no-aw | single-task | arch | all");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mine) {
      return cmd_mine(mine_flags, mine_out);
    }
    if (*train_cmd) {
      return cmd_train(train_flags);
    }
    if (*eval_cmd) {
      return cmd_eval(eval_run, eval_ckpt, eval_flags, eval_hp, eval_split);
    }
    if (*ablate) {
      return cmd_ablate(ablate_flags, suite);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
