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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "posaug/distill.hpp"
#include "posaug/kernels.hpp"

using namespace posaug;

namespace {

std::vector<Representation> random_reprs(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::vector<Representation> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testutil::random_vector(rng, d));
  return out;
}

struct Experiment {
  Dataset all;
  Split split;
  HistoryMap histories;
  std::vector<std::vector<ItemIndex>> positives;

  explicit Experiment(const std::string& log, double fraction = 0.2)
      : all(testutil::dataset_from(log)), split(chronological_split(all, fraction)) {
    histories = build_user_histories(split.train, 20);
    positives = build_train_positives(split.train);
  }
  ExperimentInputs inputs() const { return {&split.train, &split.test, &histories, &positives}; }
  TrainingData data() const { return {&split.train, &histories}; }
};

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.hp.dim = 8;
  cfg.hp.negatives = 5;
  cfg.hp.batch_size = 64;
  cfg.hp.epochs = 3;
  cfg.hp.lr = 0.01;
  cfg.hp.k = 10;
  cfg.hp.k_u = 3;
  return cfg;
}

EvalConfig small_eval() {
  EvalConfig e;
  e.ks = {5, 10, 20};
  e.diversity_depths = {5, 10};
  return e;
}

}  // namespace

TEST_CASE("mix-up representation") {
  const std::vector<double> v = {1.0, -2.0};
  const std::vector<std::pair<Representation, double>> one = {{{3.0, 4.0}, 1.0}};
  CHECK(mixup_representation(v, one, 0.0) == Representation{1.0, -2.0});
  CHECK(mixup_representation(v, one, 0.5) == Representation{2.5, 0.0});
  const std::vector<std::pair<Representation, double>> two = {{{1.0, 0.0}, 0.25},
                                                              {{0.0, 2.0}, 0.75}};
  const auto r = mixup_representation(v, two, 0.2);
  CHECK(r[0] == doctest::Approx(1.0 + 0.2 * 0.25));
  CHECK(r[1] == doctest::Approx(-2.0 + 0.2 * 0.75 * 2.0));
}

TEST_CASE("mix-up loss: degeneracy, sum of terms, weighted terms") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = testutil::random_vector(rng, 4), vp = testutil::random_vector(rng, 4);
    const auto negs = random_reprs(rng, 3, 4);
    const auto augv = random_reprs(rng, 3, 4);
    std::vector<std::pair<Representation, double>> aug;
    for (const auto& a : augv) aug.push_back({a, std::uniform_real_distribution<double>(0.0, 1.0)(rng)});

    const double base = sampled_softmax_loss(u, vp, negs);
    CHECK(mixup_loss(u, vp, negs, aug, 0.0, MixupMode::kOutputSpace) == base);
    CHECK(mixup_loss(u, vp, negs, aug, 0.0, MixupMode::kRepresentationSpace) == base);

    const std::vector<std::pair<Representation, double>> single = {{augv[0], 1.0}};
    CHECK(mixup_loss(u, vp, negs, single, 1.0, MixupMode::kOutputSpace) ==
          doctest::Approx(base + sampled_softmax_loss(u, augv[0], negs)).epsilon(1e-12));

    // Term-by-term oracle in extended precision.
    const auto logit = [&](const Representation& v) { return oracle::dot(u, v); };
    std::vector<double> nl;
    for (const auto& n : negs) nl.push_back(logit(n));
    const double beta = 0.37;
    double want = oracle::softmax_loss(logit(vp), nl);
    for (const auto& [v, w] : aug) want += beta * w * oracle::softmax_loss(logit(v), nl);
    const double got = mixup_loss(u, vp, negs, aug, beta, MixupMode::kOutputSpace);
    CHECK(std::abs(got - want) <= 1e-12 * want);

    const auto vt = mixup_representation(vp, aug, beta);
    CHECK(mixup_loss(u, vp, negs, aug, beta, MixupMode::kRepresentationSpace) ==
          doctest::Approx(sampled_softmax_loss(u, vt, negs)).epsilon(1e-12));

    // Larger beta, larger loss.
    double prev = base;
    for (double b : {0.1, 0.5, 1.0, 2.0}) {
      const double l = mixup_loss(u, vp, negs, aug, b, MixupMode::kOutputSpace);
      CHECK(l > prev);
      prev = l;
    }
  }
}

TEST_CASE("mix-up gradients match central differences in both modes") {
  std::mt19937_64 rng(2);
  for (MixupMode mode : {MixupMode::kOutputSpace, MixupMode::kRepresentationSpace}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = oracle::random_grad_instance(rng, true);
      CHECK(oracle::gradient_error(g, LossSpec{0.8, mode}) < 1e-3);
    }
  }
}

TEST_CASE("train_base with zero epochs returns the initialization") {
  const Experiment ex(testutil::random_log(10, 20, 200, 1));
  HyperParams hp;
  hp.dim = 4;
  hp.epochs = 0;
  Rng a(3), b(4), c(3);
  const ModelParams p = train_base(ex.data(), hp, a, b);
  CHECK(p == ModelParams::initialize(ex.split.train.num_users(), ex.split.train.num_items(), hp, c));
}

TEST_CASE("train_base losses are finite and decreasing on average") {
  const Experiment ex(testutil::random_log(20, 40, 800, 2));
  HyperParams hp = small_config().hp;
  hp.epochs = 8;
  Rng a(1), b(2);
  std::vector<double> losses;
  train_base(ex.data(), hp, a, b, &losses);
  REQUIRE(losses.size() == 8);
  for (double l : losses) CHECK(std::isfinite(l));
  CHECK(losses.back() < losses.front());
}

TEST_CASE("separable toy: every user's top-1 is their item") {
  const Experiment ex(testutil::separable_log(2, 10));
  HyperParams hp;
  hp.dim = 4;
  hp.negatives = 1;
  hp.batch_size = 4;
  hp.lr = 0.01;
  hp.epochs = 200;
  Rng a(1), b(2);
  const ModelParams p = train_base(ex.data(), hp, a, b);
  const Matrix items = encode_all_items(p);
  const EmbeddingIndex idx = EmbeddingIndex::build(items.view());
  for (UserIndex u = 0; u < 2; ++u) {
    const auto repr = encode_user(p, u, ex.histories.at(u).items);
    const auto top = idx.topk(repr, 1);
    REQUIRE(top.size() == 1);
    CHECK(ex.split.train.items->raw(top[0].row) == "i" + ex.split.train.users->raw(u).substr(1));
  }
}

TEST_CASE("pipeline: beta = 0 reproduces the continued baseline") {
  kernels::set_num_threads(2);
  const Experiment ex(testutil::random_log(20, 40, 800, 3));
  for (MixupMode mode : {MixupMode::kOutputSpace, MixupMode::kRepresentationSpace}) {
    PipelineConfig cfg = small_config();
    cfg.hp.beta_mix = 0.0;
    cfg.mixup_mode = mode;
    const PipelineResult r = run_pipeline(ex.inputs(), cfg, small_eval(), 9);
    CHECK(r.mixup.params == r.control.params);
    CHECK(r.mixup.metrics == r.control.metrics);
    CHECK(r.mixup.losses == r.control.losses);
    CHECK(!(r.base.params == r.control.params));
  }
}

TEST_CASE("pipeline: augmentation changes training and runs are deterministic") {
  const Experiment ex(testutil::random_log(20, 40, 800, 4));
  PipelineConfig cfg = small_config();
  cfg.hp.beta_mix = 0.5;
  const PipelineResult a = run_pipeline(ex.inputs(), cfg, small_eval(), 5);
  const PipelineResult b = run_pipeline(ex.inputs(), cfg, small_eval(), 5);
  CHECK(a.mixup.params == b.mixup.params);
  CHECK(a.mixup.metrics == b.mixup.metrics);
  CHECK(a.augmented == b.augmented);
  CHECK(!(a.mixup.params == a.control.params));
  CHECK(a.base.losses.size() == 3);
  CHECK(a.mixup.losses.size() == 3);
  for (const auto& ex_aug : a.augmented) CHECK(ex_aug.total() <= 9);
}

TEST_CASE("pipeline options: fresh init, refresh, phase-2 epochs, source filter") {
  const Experiment ex(testutil::random_log(20, 40, 800, 5));
  PipelineConfig cfg = small_config();
  cfg.phase2_init = Phase2Init::kFresh;
  cfg.refresh_every = 1;
  cfg.phase2_epochs = 2;
  cfg.sampler = SamplerKind::kBeta;
  cfg.sources = {true, false, true};
  const PipelineResult r = run_pipeline(ex.inputs(), cfg, small_eval(), 6);
  CHECK(r.mixup.losses.size() == 2);
  CHECK(r.control.losses.size() == 2);
  for (const auto& a : r.augmented) CHECK(a.aug[1].empty());
  CHECK(r.mixup.params.all_finite());
}

TEST_CASE("ablation rows share phase 1") {
  const Experiment ex(testutil::random_log(20, 40, 800, 6));
  PipelineConfig cfg = small_config();
  const std::vector<std::array<bool, kNumSources>> variants = {
      {true, true, true}, {false, true, true}, {true, false, true}, {true, true, false},
      {false, false, false}};
  PipelineResult full;
  const auto rows = run_ablation(ex.inputs(), cfg, small_eval(), 7, variants, &full);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].name == "full");
  CHECK(rows[1].name == "w/o u2i");
  CHECK(rows[2].name == "w/o i2i");
  CHECK(rows[3].name == "w/o u2u2i");
  CHECK(rows[4].name == "w/o all");
  CHECK(rows[4].metrics == full.control.metrics);
  CHECK(ablation_name({false, false, true}) == "w/o u2i+i2i");

  // The full row equals a plain pipeline run with the same seed.
  const PipelineResult r = run_pipeline(ex.inputs(), cfg, small_eval(), 7);
  CHECK(rows[0].metrics == r.mixup.metrics);
  CHECK(full.mixup.params == r.mixup.params);
  CHECK(full.augmented == r.augmented);
}

TEST_CASE("mode and init names round-trip") {
  for (MixupMode m : {MixupMode::kOutputSpace, MixupMode::kRepresentationSpace}) {
    CHECK(parse_mixup_mode(mixup_mode_name(m)) == m);
  }
  for (Phase2Init p : {Phase2Init::kFromPhase1, Phase2Init::kFresh}) {
    CHECK(parse_phase2_init(phase2_init_name(p)) == p);
  }
  CHECK_FALSE(parse_mixup_mode("both"));
}
