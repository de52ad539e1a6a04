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
#include <sstream>

#include "oracles.hpp"
#include "posaug/checkpoint.hpp"
#include "posaug/config.hpp"
#include "posaug/report.hpp"

using namespace posaug;

TEST_CASE("config text round-trips") {
  RunConfig c;
  c.dataset = "data/x.tsv";
  c.hp().lr = 0.1 + 0.2;  // not exactly representable in decimal
  c.hp().dim = 7;
  c.hp().seed = 123456789012345ULL;
  c.pipeline.sampler = SamplerKind::kBeta;
  c.pipeline.mixup_mode = MixupMode::kRepresentationSpace;
  c.pipeline.phase2_init = Phase2Init::kFresh;
  c.pipeline.sources = {true, false, true};
  c.eval.ks = {1, 7};
  c.eval.exclude_train = false;
  c.dump_topk = 12;
  const std::string text = config_to_text(c);
  std::istringstream in(text);
  const RunConfig back = parse_config(in, "echo");
  CHECK(config_to_text(back) == text);
  CHECK(back.hp() == c.hp());
  CHECK(back.pipeline.sources == c.pipeline.sources);

  RunConfig none;
  set_config_value(none, "sources", "none");
  CHECK(none.pipeline.sources == std::array<bool, kNumSources>{false, false, false});
  CHECK(get_config_value(none, "sources") == "none");
}

TEST_CASE("config errors are line anchored") {
  std::istringstream in("# comment\ndim = 8\n\nbogus = 1\n");
  try {
    parse_config(in, "run.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("run.cfg:4:", 0) == 0);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  std::istringstream bad_value("dim = eight\n");
  CHECK_THROWS_WITH_AS(parse_config(bad_value, "c"), doctest::Contains("c:1:"), ConfigError);
  std::istringstream no_eq("dim 8\n");
  CHECK_THROWS_AS(parse_config(no_eq, "c"), ConfigError);
  std::istringstream bad_sampler("sampler = gaussian\n");
  CHECK_THROWS_AS(parse_config(bad_sampler, "c"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/posaug.cfg"), ConfigError);

  RunConfig c;
  c.test_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("every key is readable and writable") {
  RunConfig c;
  for (const std::string& key : config_keys()) {
    const std::string v = get_config_value(c, key);
    CHECK_NOTHROW(set_config_value(c, key, v));
    CHECK(get_config_value(c, key) == v);
  }
}

TEST_CASE("checkpoint round-trips bitwise, including Adam state") {
  std::mt19937_64 rng(1);
  HyperParams hp;
  hp.dim = 5;
  hp.hidden = 9;
  hp.lr = 0.123456789;
  ModelParams p = oracle::random_params(7, 11, 5, 9, rng);
  p.adam().m.assign(p.values().size(), 0.25);
  p.adam().v.assign(p.values().size(), 1.0 / 3.0);
  p.adam().step = 17;
  std::stringstream buf;
  save_checkpoint(buf, p, hp);
  const Checkpoint ck = load_checkpoint(buf);
  CHECK(ck.params == p);
  CHECK(ck.hp == hp);
  CHECK(hyperparams_to_text(parse_hyperparams(hyperparams_to_text(hp))) == hyperparams_to_text(hp));

  const auto dir = testutil::temp_dir("ckpt");
  save_checkpoint(dir / "a.ckpt", p, hp);
  CHECK(load_checkpoint(dir / "a.ckpt").params == p);

  std::string bytes = buf.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(truncated), CheckpointError);
  bytes[0] = 'X';
  std::istringstream bad_magic(bytes);
  CHECK_THROWS_AS(load_checkpoint(bad_magic), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("metrics JSON round-trips") {
  RankingMetrics m;
  m.num_events = 12;
  m.hr = {{50, 0.25}, {100, 0.5}};
  m.ndcg = {{50, 0.125}, {100, 1.0 / 3.0}};
  m.diversity = {{100, 40}, {500, 90}};
  CHECK(metrics_from_json(metrics_to_json(m)) == m);
  CHECK(metrics_from_json(Json::parse(metrics_to_json(m).dump())) == m);
}

TEST_CASE("augmentation summary from rows and from examples agree") {
  std::vector<AugmentedExample> set(2);
  set[0].user = 0;
  set[0].pos_item = 1;
  set[0].aug[0] = {{2, 0.75, 0.9, 0.9}, {3, 0.25, 0.3, 0.3}};
  set[1].user = 1;
  set[1].pos_item = 2;
  set[1].aug[2] = {{3, 1.0, 0.5, 0.5}};
  const auto a = summarize_augmentations(std::span<const AugmentedExample>(set));
  CHECK(a.examples == 2);
  CHECK(a.rows == 3);
  CHECK(a.distinct_items == 2);
  CHECK(a.per_source[0].rows == 2);
  CHECK(a.per_source[0].mean_weight == doctest::Approx(0.5));
  CHECK(a.per_source[0].weight_histogram[7] == 1);
  CHECK(a.per_source[0].weight_histogram[2] == 1);
  CHECK(a.per_source[2].weight_histogram[9] == 1);
  CHECK(a.per_source[1].rows == 0);

  std::vector<AugmentationRow> rows = {
      {"u0", "i1", CandidateSource::kU2I, "i2", 0.9, 0.75},
      {"u0", "i1", CandidateSource::kU2I, "i3", 0.3, 0.25},
      {"u1", "i2", CandidateSource::kU2U2I, "i3", 0.5, 1.0}};
  const auto b = summarize_augmentations(std::span<const AugmentationRow>(rows));
  CHECK(summary_to_json(a) == summary_to_json(b));
}
