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

#ifndef POSAUG_DISTILL_HPP_
#define POSAUG_DISTILL_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posaug/augmentation.hpp"
#include "posaug/data.hpp"
#include "posaug/evaluation.hpp"
#include "posaug/model.hpp"

namespace posaug {

enum class Phase2Init { kFromPhase1, kFresh };

const char* mixup_mode_name(MixupMode m);
std::optional<MixupMode> parse_mixup_mode(std::string_view s);
const char* phase2_init_name(Phase2Init p);
std::optional<Phase2Init> parse_phase2_init(std::string_view s);

struct PipelineConfig {
  HyperParams hp;
  MixupMode mixup_mode = MixupMode::kOutputSpace;
  SamplerKind sampler = SamplerKind::kUniform;
  // Rebuild the augmentations from the phase-2 model every this many
  // epochs; 0 keeps the phase-1 augmentations frozen.
  std::size_t refresh_every = 0;
  Phase2Init phase2_init = Phase2Init::kFromPhase1;
  // 0 means hp.epochs.
  std::size_t phase2_epochs = 0;
  std::array<bool, kNumSources> sources = {true, true, true};

  std::size_t phase2_epoch_count() const {
    return phase2_epochs == 0 ? hp.epochs : phase2_epochs;
  }
  AugmentConfig augment_config(std::uint64_t seed) const;
};

// Everything a training loop needs besides the parameters.
struct TrainingData {
  const Dataset* train = nullptr;
  const HistoryMap* histories = nullptr;
};

// Runs `epochs` epochs of shuffled mini-batch training. When `augmented` is
// given (one entry per train interaction) its items enter the loss through
// `spec`. Returns the mean loss of every epoch.
std::vector<double> train_epochs(ModelParams& params, const TrainingData& data,
                                 const HyperParams& hp, std::size_t epochs,
                                 const LossSpec& spec,
                                 std::span<const AugmentedExample> augmented, Rng& rng);

// Phase 1: initializes from `init_rng`, trains hp.epochs epochs with the
// plain sampled-softmax loss.
ModelParams train_base(const TrainingData& data, const HyperParams& hp, Rng& init_rng,
                       Rng& train_rng, std::vector<double>* losses = nullptr);

// v + beta * sum_i w_i v_i
Representation mixup_representation(std::span<const double> v,
                                    std::span<const std::pair<Representation, double>> aug,
                                    double beta_mix);

// Output-space: L(u,v+) + beta * sum_i w_i L(u,v_i), every term sharing the
// same negatives. Representation-space: L(u, mixup_representation(...)).
double mixup_loss(std::span<const double> u, std::span<const double> v_pos,
                  std::span<const Representation> v_negs,
                  std::span<const std::pair<Representation, double>> aug,
                  double beta_mix, MixupMode mode);

struct ModelRun {
  std::string name;
  ModelParams params;
  RankingMetrics metrics;
  std::vector<double> losses;
};

struct PipelineResult {
  ModelRun base;     // phase 1
  ModelRun control;  // phase 1 continued without augmentation
  ModelRun mixup;    // phase 2 with the mix-up loss
  std::vector<AugmentedExample> augmented;  // built from phase 1
};

struct ExperimentInputs {
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
  const HistoryMap* histories = nullptr;
  const std::vector<std::vector<ItemIndex>>* train_positives = nullptr;
};

// Trains phase 1, builds the augmented train set, then trains the
// compute-matched control and the mix-up model from the same phase-2
// generator so that beta_mix = 0 reproduces the control exactly.
PipelineResult run_pipeline(const ExperimentInputs& in, const PipelineConfig& cfg,
                        const EvalConfig& eval, std::uint64_t seed);

struct AblationRow {
  std::string name;
  std::array<bool, kNumSources> sources{};
  RankingMetrics metrics;
};

// Clears the augmentations of every disabled source.
std::vector<AugmentedExample> filter_sources(std::vector<AugmentedExample> set,
                                             const std::array<bool, kNumSources>& sources);

// Shares one phase 1 across variants; each variant disables a subset of
// sources. An all-disabled variant is the continued baseline. `full_run`
// receives phase 1, the control, the unfiltered augmentations and, when an
// all-enabled variant is listed, its phase-2 run.
std::vector<AblationRow> run_ablation(
    const ExperimentInputs& in, const PipelineConfig& cfg, const EvalConfig& eval,
    std::uint64_t seed, std::span<const std::array<bool, kNumSources>> variants,
    PipelineResult* full_run = nullptr);

// "full" for all sources, "w/o all" for none, else "w/o u2i" style names.
std::string ablation_name(const std::array<bool, kNumSources>& sources);

}  // namespace posaug

#endif  // POSAUG_DISTILL_HPP_
