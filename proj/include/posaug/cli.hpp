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

#ifndef POSAUG_CLI_HPP_
#define POSAUG_CLI_HPP_

#include <array>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "posaug/augmentation.hpp"
#include "posaug/config.hpp"

namespace posaug::cli {

// Process exit codes, one per failure class.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kData = 3,
  kTraining = 4,
  kIo = 5,
};

// Maps an in-flight exception to an exit code and writes one diagnostic
// line to `err`.
int report_failure(std::exception_ptr e, std::ostream& err);

// Applies the thread cap: cfg.threads if set, else POSAUG_THREADS.
void apply_threads(const RunConfig& cfg);

// load, split, then run the pipeline for cfg.num_seeds seeds (seed, seed+1,
// ...). Writes into cfg.output_dir:
//   config.txt, phase1.ckpt, phase2.ckpt, augmentations.tsv (first seed),
//   report.txt, report.json, and optionally ranks.tsv / topk.tsv.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Table-4 style ablation on the first seed. With `sweep` the rows are full,
// w/o u2i, w/o i2i, w/o u2u2i and w/o all; otherwise full plus the variant
// without the `drop` sources. Writes config.txt, augmentations.tsv (the
// dropped variant, or every source for a sweep), ablation.txt and
// ablation.json.
int cmd_ablate(const RunConfig& cfg, const std::array<bool, kNumSources>& drop,
               bool sweep, std::ostream& out, std::ostream& err);

// Evaluates a checkpoint on the test split of cfg.dataset. The split and
// history length come from cfg. Writes the metrics JSON to `metrics_path`
// when non-empty, and always to `out`.
int cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& metrics_path, std::ostream& out,
                 std::ostream& err);

// Summarizes an augmentation dump: per-source counts, weight histograms and
// distinct-item statistics.
int cmd_inspect_aug(const std::filesystem::path& dump, bool json, std::ostream& out,
                    std::ostream& err);

}  // namespace posaug::cli

#endif  // POSAUG_CLI_HPP_
