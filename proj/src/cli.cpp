// Copyright 2026 The posaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "posaug/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <new>

#include "posaug/checkpoint.hpp"
#include "posaug/data.hpp"
#include "posaug/distill.hpp"
#include "posaug/evaluation.hpp"
#include "posaug/kernels.hpp"
#include "posaug/report.hpp"

namespace posaug::cli {
namespace {

namespace fs = std::filesystem;

struct Prepared {
  Split split;
  HistoryMap histories;
  std::vector<std::vector<ItemIndex>> train_positives;

  ExperimentInputs inputs() const {
    return {&split.train, &split.test, &histories, &train_positives};
  }
};

Prepared prepare(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset path given");
  if (!fs::exists(cfg.dataset)) {
    throw IoError("dataset '" + cfg.dataset + "' does not exist");
  }
  const Dataset ds = load_interactions(cfg.dataset);
  Prepared p{chronological_split(ds, cfg.test_fraction), {}, {}};
  if (p.split.test.interactions.empty()) {
    throw EmptyEvaluation("no test events survive the cold-start filter");
  }
  p.histories = build_user_histories(p.split.train, cfg.hp().max_history);
  p.train_positives = build_train_positives(p.split.train);
  return p;
}

fs::path make_output_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  return f;
}

void close_out(std::ofstream& f, const fs::path& path) {
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f = open_out(path);
  f << text;
  close_out(f, path);
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_augmentations(const fs::path& path, std::span<const AugmentedExample> set,
                         const Dataset& train) {
  std::ofstream f = open_out(path);
  write_augmentations_tsv(f, set, *train.users, *train.items);
  close_out(f, path);
}

void write_topk(const fs::path& path, const Evaluation& ev, std::size_t depth,
                const Dataset& train) {
  std::ofstream f = open_out(path);
  f << "user\trank\titem\n";
  for (const auto& [user, list] : ev.topk) {
    for (std::size_t r = 0; r < std::min(depth, list.size()); ++r) {
      f << train.users->raw(user) << '\t' << r + 1 << '\t' << train.items->raw(list[r])
        << '\n';
    }
  }
  close_out(f, path);
}

void dump_eval(const RunConfig& cfg, const fs::path& dir, const ModelParams& params,
               const Prepared& p) {
  if (!cfg.dump_ranks && cfg.dump_topk == 0) return;
  EvalConfig eval = cfg.eval;
  if (cfg.dump_topk > 0) eval.diversity_depths.push_back(cfg.dump_topk);
  std::sort(eval.diversity_depths.begin(), eval.diversity_depths.end());
  const Evaluation ev =
      evaluate_full(params, p.split.test, p.histories, p.train_positives, eval);
  if (cfg.dump_ranks) {
    const fs::path path = dir / "ranks.tsv";
    std::ofstream f = open_out(path);
    write_ranks_tsv(f, ev.ranks, *p.split.train.users, *p.split.train.items);
    close_out(f, path);
  }
  if (cfg.dump_topk > 0) write_topk(dir / "topk.tsv", ev, cfg.dump_topk, p.split.train);
}

}  // namespace

int report_failure(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "posaug: config error: " << x.what() << '\n';
    return kConfig;
  } catch (const IoError& x) {
    err << "posaug: i/o error: " << x.what() << '\n';
    return kIo;
  } catch (const CheckpointError& x) {
    err << "posaug: checkpoint error: " << x.what() << '\n';
    return kData;
  } catch (const MalformedLine& x) {
    err << "posaug: data error: " << x.what() << '\n';
    return kData;
  } catch (const EmptyDataset& x) {
    err << "posaug: data error: " << x.what() << '\n';
    return kData;
  } catch (const InvalidFraction& x) {
    err << "posaug: config error: " << x.what() << '\n';
    return kConfig;
  } catch (const EmptyEvaluation& x) {
    err << "posaug: data error: " << x.what() << '\n';
    return kData;
  } catch (const Error& x) {
    err << "posaug: training error: " << x.what() << '\n';
    return kTraining;
  } catch (const std::bad_alloc&) {
    err << "posaug: out of memory\n";
    return kTraining;
  } catch (const std::exception& x) {
    err << "posaug: error: " << x.what() << '\n';
    return kTraining;
  }
}

void apply_threads(const RunConfig& cfg) {
  int n = cfg.threads;
  if (n == 0) {
    if (const char* env = std::getenv("POSAUG_THREADS")) n = std::atoi(env);
  }
  if (n > 0) kernels::set_num_threads(n);
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    apply_threads(cfg);
    const Prepared p = prepare(cfg);
    const fs::path dir = make_output_dir(cfg);
    write_text(dir / "config.txt", config_to_text(cfg));

    std::vector<SeedRun> runs;
    for (std::size_t s = 0; s < cfg.num_seeds; ++s) {
      const std::uint64_t seed = cfg.hp().seed + s;
      out << "seed " << seed << ": training\n" << std::flush;
      const PipelineResult r = run_pipeline(p.inputs(), cfg.pipeline, cfg.eval, seed);
      if (s == 0) {
        save_checkpoint(dir / "phase1.ckpt", r.base.params, cfg.hp());
        save_checkpoint(dir / "phase2.ckpt", r.mixup.params, cfg.hp());
        write_augmentations(dir / "augmentations.tsv", r.augmented, p.split.train);
        dump_eval(cfg, dir, r.mixup.params, p);
      }
      runs.push_back(make_seed_run(seed, r));
    }
    const std::string text = run_report_text(cfg, p.split.report, runs);
    write_text(dir / "report.txt", text);
    write_json(dir / "report.json", run_report_json(cfg, p.split.report, runs));
    out << text;
    return kOk;
  } catch (...) {
    return report_failure(std::current_exception(), err);
  }
}

int cmd_ablate(const RunConfig& cfg, const std::array<bool, kNumSources>& drop,
               bool sweep, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    apply_threads(cfg);
    std::vector<std::array<bool, kNumSources>> variants;
    variants.push_back({true, true, true});
    std::array<bool, kNumSources> kept{};
    for (std::size_t s = 0; s < kNumSources; ++s) kept[s] = !drop[s];
    if (sweep) {
      for (std::size_t s = 0; s < kNumSources; ++s) {
        std::array<bool, kNumSources> v = {true, true, true};
        v[s] = false;
        variants.push_back(v);
      }
      variants.push_back({false, false, false});
    } else if (kept != std::array<bool, kNumSources>{true, true, true}) {
      variants.push_back(kept);
    }

    const Prepared p = prepare(cfg);
    const fs::path dir = make_output_dir(cfg);
    write_text(dir / "config.txt", config_to_text(cfg));
    const std::uint64_t seed = cfg.hp().seed;
    PipelineResult full;
    const auto rows = run_ablation(p.inputs(), cfg.pipeline, cfg.eval, seed, variants, &full);
    const std::array<bool, kNumSources> dumped =
        sweep ? std::array<bool, kNumSources>{true, true, true} : kept;
    write_augmentations(dir / "augmentations.tsv", filter_sources(full.augmented, dumped),
                        p.split.train);

    // Phase 1 heads the table; "w/o all" is the continued baseline.
    std::vector<AblationRow> table;
    table.push_back({"base", {false, false, false}, full.base.metrics});
    table.insert(table.end(), rows.begin(), rows.end());
    const std::string text = ablation_report_text(table, cfg.eval);
    write_text(dir / "ablation.txt", text);
    write_json(dir / "ablation.json", ablation_report_json(cfg, p.split.report, seed, table));
    out << text;
    return kOk;
  } catch (...) {
    return report_failure(std::current_exception(), err);
  }
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& checkpoint,
                 const fs::path& metrics_path, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    apply_threads(cfg);
    const Checkpoint ck = load_checkpoint(checkpoint);
    RunConfig effective = cfg;
    effective.hp().max_history = ck.hp.max_history;
    const Prepared p = prepare(effective);
    if (ck.params.num_users() != p.split.train.num_users() ||
        ck.params.num_items() != p.split.train.num_items()) {
      throw CheckpointError("checkpoint vocabulary (" +
                            std::to_string(ck.params.num_users()) + " users, " +
                            std::to_string(ck.params.num_items()) +
                            " items) does not match the dataset");
    }
    const RankingMetrics m =
        evaluate(ck.params, p.split.test, p.histories, p.train_positives, cfg.eval);
    Json j;
    j["schema"] = kMetricsSchema;
    j["checkpoint"] = checkpoint.filename().string();
    j["metrics"] = metrics_to_json(m);
    const std::string text = j.dump(2) + "\n";
    if (!metrics_path.empty()) write_text(metrics_path, text);
    out << text;
    return kOk;
  } catch (...) {
    return report_failure(std::current_exception(), err);
  }
}

int cmd_inspect_aug(const fs::path& dump, bool json, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(dump, std::ios::binary);
    if (!in) throw IoError("cannot open '" + dump.string() + "'");
    const auto rows = read_augmentations_tsv(in);
    const AugmentationSummary s = summarize_augmentations(rows);
    if (json) {
      out << summary_to_json(s).dump(2) << '\n';
    } else {
      out << summary_text(s);
    }
    return kOk;
  } catch (...) {
    return report_failure(std::current_exception(), err);
  }
}

}  // namespace posaug::cli
