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

// Command-line entry point. Every configuration key is accepted both in the
// config file and as a --key flag; flags win.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "posaug/cli.hpp"
#include "posaug/config.hpp"

namespace {

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help = {
      {"dataset", "interaction log: user<TAB>item<TAB>timestamp per line"},
      {"output_dir", "directory receiving reports, checkpoints and dumps"},
      {"test_fraction", "fraction of the latest events held out for testing"},
      {"dim", "representation size d"},
      {"hidden", "hidden width of both towers (0: 2*dim)"},
      {"negatives", "sampled negatives per positive"},
      {"lr", "Adam learning rate"},
      {"batch_size", "mini-batch size"},
      {"epochs", "phase-1 epochs"},
      {"k", "candidates per source before sampling"},
      {"k_u", "similar users queried by u2u2i"},
      {"m", "augmented items kept per source and interaction"},
      {"alpha", "beta-sampler shape"},
      {"beta_mix", "weight of the augmented terms in the mix-up loss"},
      {"max_history", "history items fed to the user tower"},
      {"seed", "base seed; seed i of a multi-seed run uses seed+i"},
      {"adam_beta1", "Adam first-moment decay"},
      {"adam_beta2", "Adam second-moment decay"},
      {"adam_eps", "Adam epsilon"},
      {"phase2_epochs", "phase-2 epochs (0: same as epochs)"},
      {"mixup_mode", "output_space | representation_space"},
      {"sampler", "uniform | importance | beta"},
      {"refresh_every", "rebuild augmentations every N phase-2 epochs (0: never)"},
      {"phase2_init", "from_phase1 | fresh"},
      {"sources", "comma list of u2i,i2i,u2u2i or none"},
      {"eval_k", "comma list of HR/NDCG cut-offs"},
      {"diversity_depths", "comma list of distinct-item depths"},
      {"exclude_train", "drop the user's train items from the ranking (true/false)"},
      {"num_seeds", "number of seeds for run"},
      {"threads", "worker cap (0: POSAUG_THREADS or all cores)"},
      {"dump_ranks", "write ranks.tsv for the augmented model (true/false)"},
      {"dump_topk", "write topk.tsv of this depth for the augmented model (0: off)"},
  };
  return help;
}

struct ConfigArgs {
  std::string config_path;
  std::map<std::string, std::optional<std::string>> overrides;
};

void add_config_options(CLI::App* app, ConfigArgs& args) {
  app->add_option("-c,--config", args.config_path, "key = value config file");
  for (const std::string& key : posaug::config_keys()) {
    auto& slot = args.overrides[key];
    const auto it = key_help().find(key);
    app->add_option("--" + key, slot, it == key_help().end() ? key : it->second)
        ->group("Config keys");
  }
}

posaug::RunConfig resolve(const ConfigArgs& args) {
  posaug::RunConfig cfg;
  if (!args.config_path.empty()) cfg = posaug::load_config(args.config_path);
  for (const std::string& key : posaug::config_keys()) {
    const auto& v = args.overrides.at(key);
    if (v) posaug::set_config_value(cfg, key, *v);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posaug: two-tower retrieval with self-distilled positive augmentation"};
  app.require_subcommand(1);
  app.footer("Environment: POSAUG_THREADS sets the default worker count.");

  ConfigArgs run_args, ablate_args, eval_args;
  auto* run = app.add_subcommand("run", "train base, control and augmented models; write reports");
  add_config_options(run, run_args);

  auto* ablate = app.add_subcommand("ablate", "compare models with candidate sources removed");
  add_config_options(ablate, ablate_args);
  std::vector<std::string> drop;
  bool sweep = false;
  ablate->add_option("--drop", drop, "sources to remove: u2i, i2i, u2u2i")->delimiter(',');
  ablate->add_flag("--sweep", sweep, "run w/o u2i, w/o i2i, w/o u2u2i and w/o all");

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
  add_config_options(evaluate, eval_args);
  std::string checkpoint, metrics_out;
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  evaluate->add_option("--metrics-out", metrics_out, "also write the metrics JSON here");

  auto* inspect = app.add_subcommand("inspect-aug", "summarize an augmentations.tsv dump");
  std::string dump;
  bool as_json = false;
  inspect->add_option("dump", dump, "augmentation TSV")->required();
  inspect->add_flag("--json", as_json, "emit JSON instead of key=value text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : posaug::cli::kUsage;
  }

  if (*inspect) return posaug::cli::cmd_inspect_aug(dump, as_json, std::cout, std::cerr);

  const ConfigArgs& args = *run ? run_args : *ablate ? ablate_args : eval_args;
  posaug::RunConfig cfg;
  try {
    cfg = resolve(args);
  } catch (...) {
    return posaug::cli::report_failure(std::current_exception(), std::cerr);
  }

  if (*run) return posaug::cli::cmd_run(cfg, std::cout, std::cerr);
  if (*ablate) {
    std::array<bool, posaug::kNumSources> dropped{};
    for (const std::string& name : drop) {
      const auto s = posaug::parse_source(name);
      if (!s) {
        std::cerr << "posaug: config error: unknown source '" << name << "'\n";
        return posaug::cli::kConfig;
      }
      dropped[static_cast<std::size_t>(*s)] = true;
    }
    return posaug::cli::cmd_ablate(cfg, dropped, sweep, std::cout, std::cerr);
  }
  return posaug::cli::cmd_evaluate(cfg, checkpoint, metrics_out, std::cout, std::cerr);
}
