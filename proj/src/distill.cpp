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

#include "posaug/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace posaug {

const char* mixup_mode_name(MixupMode m) {
  return m == MixupMode::kOutputSpace ? "output_space" : "representation_space";
}

std::optional<MixupMode> parse_mixup_mode(std::string_view s) {
  if (s == "output_space") return MixupMode::kOutputSpace;
  if (s == "representation_space") return MixupMode::kRepresentationSpace;
  return std::nullopt;
}

const char* phase2_init_name(Phase2Init p) {
  return p == Phase2Init::kFromPhase1 ? "from_phase1" : "fresh";
}

std::optional<Phase2Init> parse_phase2_init(std::string_view s) {
  if (s == "from_phase1") return Phase2Init::kFromPhase1;
  if (s == "fresh") return Phase2Init::kFresh;
  return std::nullopt;
}

AugmentConfig PipelineConfig::augment_config(std::uint64_t seed) const {
  AugmentConfig a;
  a.k = hp.k;
  a.k_u = hp.k_u;
  a.m = hp.m;
  a.alpha = hp.alpha;
  a.sampler = sampler;
  a.enabled = sources;
  a.seed = seed;
  return a;
}

std::vector<double> train_epochs(ModelParams& params, const TrainingData& data,
                                 const HyperParams& hp, std::size_t epochs,
                                 const LossSpec& spec,
                                 std::span<const AugmentedExample> augmented, Rng& rng) {
  const Dataset& train = *data.train;
  const std::size_t n = train.interactions.size();
  if (n == 0) throw EmptyDataset("no training interactions");
  if (!augmented.empty() && augmented.size() != n) {
    throw DimensionMismatch("augmented set does not match the train split");
  }

  std::vector<std::span<const ItemIndex>> history_of(params.num_users());
  for (const auto& [user, h] : *data.histories) {
    if (user < history_of.size()) history_of[user] = h.items;
  }
  const bool use_aug = !augmented.empty() && spec.beta_mix != 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses;
  std::vector<TrainExample> batch;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t end = std::min(n, start + hp.batch_size);
      batch.assign(end - start, TrainExample{});
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const std::size_t idx = order[start + b];
        const Interaction& x = train.interactions[idx];
        TrainExample& ex = batch[b];
        ex.user = x.user;
        ex.pos_item = x.item;
        ex.history = history_of[x.user];
        if (use_aug) {
          for (const auto& src : augmented[idx].aug) {
            for (const AugItem& a : src) ex.aug.push_back({a.item, a.weight});
          }
        }
      }
      total += train_step(params, batch, hp, spec, rng) * static_cast<double>(batch.size());
    }
    const double mean = total / static_cast<double>(n);
    if (!std::isfinite(mean) || !params.all_finite()) {
      throw Error("training diverged at epoch " + std::to_string(epoch + 1));
    }
    losses.push_back(mean);
  }
  return losses;
}

ModelParams train_base(const TrainingData& data, const HyperParams& hp, Rng& init_rng,
                       Rng& train_rng, std::vector<double>* losses) {
  const Dataset& train = *data.train;
  if (train.interactions.empty()) throw EmptyDataset("no training interactions");
  ModelParams params =
      ModelParams::initialize(train.num_users(), train.num_items(), hp, init_rng);
  auto l = train_epochs(params, data, hp, hp.epochs, LossSpec{}, {}, train_rng);
  if (losses) *losses = std::move(l);
  return params;
}

Representation mixup_representation(std::span<const double> v,
                                    std::span<const std::pair<Representation, double>> aug,
                                    double beta_mix) {
  Representation out(v.begin(), v.end());
  for (const auto& [vi, w] : aug) {
    if (vi.size() != v.size()) throw DimensionMismatch("mix-up dimension mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) out[j] += beta_mix * w * vi[j];
  }
  return out;
}

double mixup_loss(std::span<const double> u, std::span<const double> v_pos,
                  std::span<const Representation> v_negs,
                  std::span<const std::pair<Representation, double>> aug,
                  double beta_mix, MixupMode mode) {
  const std::size_t d = u.size();
  Matrix table(1 + v_negs.size() + aug.size(), d);
  const auto put = [&](std::size_t row, std::span<const double> v) {
    if (v.size() != d) throw DimensionMismatch("mix-up dimension mismatch");
    std::copy(v.begin(), v.end(), table.row(row).begin());
  };
  put(0, v_pos);
  std::vector<std::uint32_t> negs(v_negs.size());
  for (std::size_t j = 0; j < v_negs.size(); ++j) {
    negs[j] = static_cast<std::uint32_t>(1 + j);
    put(negs[j], v_negs[j]);
  }
  std::vector<SlotWeight> slots(aug.size());
  for (std::size_t i = 0; i < aug.size(); ++i) {
    slots[i] = {static_cast<std::uint32_t>(1 + v_negs.size() + i), aug[i].second};
    put(slots[i].slot, aug[i].first);
  }
  return example_loss(u, table.view(), 0, negs, slots, LossSpec{beta_mix, mode}, 1.0,
                      nullptr, nullptr);
}

std::string ablation_name(const std::array<bool, kNumSources>& sources) {
  const auto on = static_cast<std::size_t>(std::count(sources.begin(), sources.end(), true));
  if (on == kNumSources) return "full";
  if (on == 0) return "w/o all";
  std::string name;
  for (CandidateSource s : kAllSources) {
    if (sources[static_cast<std::size_t>(s)]) continue;
    name += name.empty() ? "w/o " : "+";
    name += source_name(s);
  }
  return name;
}

std::vector<AugmentedExample> filter_sources(std::vector<AugmentedExample> set,
                                           const std::array<bool, kNumSources>& sources) {
  for (AugmentedExample& ex : set) {
    for (std::size_t s = 0; s < kNumSources; ++s) {
      if (!sources[s]) ex.aug[s].clear();
    }
  }
  return set;
}

namespace {

struct Phase1 {
  ModelRun base;
  ModelRun control;
  std::vector<AugmentedExample> augmented;  // all sources
};

Phase1 run_phase1(const ExperimentInputs& in, const PipelineConfig& cfg,
                  const EvalConfig& eval, std::uint64_t seed) {
  const TrainingData data{in.train, in.histories};
  Phase1 out;
  Rng init_rng = derive_rng(seed, RngStream::kInit);
  Rng train_rng = derive_rng(seed, RngStream::kPhase1);
  out.base.name = "base";
  out.base.params = train_base(data, cfg.hp, init_rng, train_rng, &out.base.losses);
  out.base.metrics =
      evaluate(out.base.params, *in.test, *in.histories, *in.train_positives, eval);

  PipelineConfig all = cfg;
  all.sources = {true, true, true};
  out.augmented = build_augmented_trainset(*in.train, *in.histories, out.base.params,
                                           all.augment_config(seed));

  out.control.name = "base_2x";
  out.control.params = out.base.params;
  Rng phase2_rng = derive_rng(seed, RngStream::kPhase2);
  out.control.losses = train_epochs(out.control.params, data, cfg.hp,
                                    cfg.phase2_epoch_count(), LossSpec{}, {}, phase2_rng);
  out.control.metrics =
      evaluate(out.control.params, *in.test, *in.histories, *in.train_positives, eval);
  return out;
}

ModelRun run_phase2(const ExperimentInputs& in, const PipelineConfig& cfg,
                    const EvalConfig& eval, std::uint64_t seed, const ModelParams& base,
                    std::vector<AugmentedExample> augmented) {
  const TrainingData data{in.train, in.histories};
  ModelRun run;
  run.name = "augmented";
  if (cfg.phase2_init == Phase2Init::kFromPhase1) {
    run.params = base;
  } else {
    Rng init_rng = derive_rng(seed, RngStream::kPhase2Init);
    run.params = ModelParams::initialize(base.num_users(), base.num_items(), cfg.hp,
                                         init_rng);
  }
  const LossSpec spec{cfg.hp.beta_mix, cfg.mixup_mode};
  Rng rng = derive_rng(seed, RngStream::kPhase2);
  const std::size_t epochs = cfg.phase2_epoch_count();
  const std::size_t chunk = cfg.refresh_every == 0 ? epochs : cfg.refresh_every;
  std::uint64_t round = 0;
  for (std::size_t done = 0; done < epochs; done += chunk) {
    if (done > 0) {
      AugmentConfig ac = cfg.augment_config(seed);
      ac.round = ++round;
      augmented = build_augmented_trainset(*in.train, *in.histories, run.params, ac);
    }
    auto l = train_epochs(run.params, data, cfg.hp, std::min(chunk, epochs - done), spec,
                          augmented, rng);
    run.losses.insert(run.losses.end(), l.begin(), l.end());
  }
  run.metrics = evaluate(run.params, *in.test, *in.histories, *in.train_positives, eval);
  return run;
}

}  // namespace

PipelineResult run_pipeline(const ExperimentInputs& in, const PipelineConfig& cfg,
                            const EvalConfig& eval, std::uint64_t seed) {
  cfg.hp.validate();
  Phase1 p1 = run_phase1(in, cfg, eval, seed);
  PipelineResult out;
  out.augmented = filter_sources(std::move(p1.augmented), cfg.sources);
  out.mixup = run_phase2(in, cfg, eval, seed, p1.base.params, out.augmented);
  out.base = std::move(p1.base);
  out.control = std::move(p1.control);
  return out;
}

std::vector<AblationRow> run_ablation(
    const ExperimentInputs& in, const PipelineConfig& cfg, const EvalConfig& eval,
    std::uint64_t seed, std::span<const std::array<bool, kNumSources>> variants,
    PipelineResult* full_run) {
  cfg.hp.validate();
  Phase1 p1 = run_phase1(in, cfg, eval, seed);
  std::vector<AblationRow> rows;
  for (const auto& sources : variants) {
    AblationRow row{ablation_name(sources), sources, {}};
    const bool none = std::none_of(sources.begin(), sources.end(), [](bool b) { return b; });
    if (none) {
      row.metrics = p1.control.metrics;
    } else {
      PipelineConfig variant = cfg;
      variant.sources = sources;
      ModelRun run = run_phase2(in, variant, eval, seed, p1.base.params,
                                filter_sources(p1.augmented, sources));
      row.metrics = run.metrics;
      const bool all = std::all_of(sources.begin(), sources.end(), [](bool b) { return b; });
      if (all && full_run) full_run->mixup = std::move(run);
    }
    rows.push_back(std::move(row));
  }
  if (full_run) {
    full_run->base = p1.base;
    full_run->control = p1.control;
    full_run->augmented = std::move(p1.augmented);
  }
  return rows;
}

}  // namespace posaug
