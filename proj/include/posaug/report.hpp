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

#ifndef POSAUG_REPORT_HPP_
#define POSAUG_REPORT_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "posaug/augmentation.hpp"
#include "posaug/config.hpp"
#include "posaug/data.hpp"
#include "posaug/distill.hpp"
#include "posaug/evaluation.hpp"

namespace posaug {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "posaug.report/1";
inline constexpr const char* kAblationSchema = "posaug.ablation/1";
inline constexpr const char* kMetricsSchema = "posaug.metrics/1";

struct SourceStats {
  std::size_t rows = 0;
  std::size_t distinct_items = 0;
  double mean_weight = 0.0;
  double mean_select_score = 0.0;
  // 10 equal-width bins over [0, 1].
  std::array<std::size_t, 10> weight_histogram{};
};

struct AugmentationSummary {
  std::size_t examples = 0;  // distinct (user, pos_item) pairs with rows
  std::size_t rows = 0;
  std::size_t distinct_items = 0;
  std::array<SourceStats, kNumSources> per_source{};
};

AugmentationSummary summarize_augmentations(std::span<const AugmentationRow> rows);
AugmentationSummary summarize_augmentations(std::span<const AugmentedExample> set);

Json metrics_to_json(const RankingMetrics& m);
RankingMetrics metrics_from_json(const Json& j);
Json summary_to_json(const AugmentationSummary& s);

struct SeedRun {
  std::uint64_t seed = 0;
  RankingMetrics base;
  RankingMetrics control;
  RankingMetrics mixup;
  AugmentationSummary augmentation;
  std::vector<double> base_losses;
  std::vector<double> control_losses;
  std::vector<double> mixup_losses;
};

SeedRun make_seed_run(std::uint64_t seed, const PipelineResult& r);

// Machine-readable report: config echo, split counts, one block per seed and
// mean deltas. Contains nothing run-time dependent.
Json run_report_json(const RunConfig& cfg, const SplitReport& split,
                     std::span<const SeedRun> runs);
std::string run_report_text(const RunConfig& cfg, const SplitReport& split,
                            std::span<const SeedRun> runs);

Json ablation_report_json(const RunConfig& cfg, const SplitReport& split,
                          std::uint64_t seed, std::span<const AblationRow> rows);
std::string ablation_report_text(std::span<const AblationRow> rows,
                                 const EvalConfig& eval);

std::string summary_text(const AugmentationSummary& s);

}  // namespace posaug

#endif  // POSAUG_REPORT_HPP_
