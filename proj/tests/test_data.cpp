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

#include <algorithm>
#include <map>
#include <set>

#include "posaug/data.hpp"
#include "test_util.hpp"

using namespace posaug;

TEST_CASE("load counts users, items and interactions") {
  const Dataset ds = testutil::dataset_from("a\tx\t1\nb\ty\t2\na\tz\t3\n");
  CHECK(ds.num_users() == 2);
  CHECK(ds.num_items() == 3);
  CHECK(ds.interactions.size() == 3);
  CHECK(ds.users->raw(0) == "a");
  CHECK(ds.items->raw(2) == "z");
}

TEST_CASE("duplicate lines are dropped, extra columns ignored") {
  const Dataset ds = testutil::dataset_from("a\tx\t1\na\tx\t1\tjunk\nb\tx\t1\n");
  CHECK(ds.interactions.size() == 2);
}

TEST_CASE("malformed input names the line") {
  try {
    testutil::dataset_from("a\tx\t1\nbroken line\n");
    FAIL("expected MalformedLine");
  } catch (const MalformedLine& e) {
    CHECK(e.line_no() == 2);
  }
  CHECK_THROWS_AS(testutil::dataset_from("a\tx\tnoon\n"), MalformedLine);
  CHECK_THROWS_AS(testutil::dataset_from("\n\n"), EmptyDataset);
}

TEST_CASE("vocabulary round-trips raw ids") {
  const std::string log = testutil::random_log(17, 23, 300, 5);
  const Dataset ds = testutil::dataset_from(log);
  std::istringstream in(log);
  std::string line;
  std::size_t i = 0;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string u, it, ts;
    std::getline(ls, u, '\t');
    std::getline(ls, it, '\t');
    std::getline(ls, ts, '\t');
    if (!seen.insert({u, it, ts}).second) continue;
    const Interaction& x = ds.interactions.at(i++);
    CHECK(ds.users->raw(x.user) == u);
    CHECK(ds.items->raw(x.item) == it);
    CHECK(std::to_string(x.timestamp) == ts);
  }
  CHECK(i == ds.interactions.size());
}

TEST_CASE("MovieLens-100K counts match an independent tally") {
  const char* path = "data/ml-100k.tsv";
  if (!std::filesystem::exists(path)) {
    MESSAGE("data/ml-100k.tsv absent; run scripts/fetch_ml100k.sh");
    return;
  }
  std::ifstream f(path);
  std::set<std::string> users, items;
  std::string u, i, t;
  while (f >> u >> i >> t) {
    users.insert(u);
    items.insert(i);
  }
  const Dataset ds = load_interactions(path);
  CHECK(ds.num_users() == users.size());
  CHECK(ds.num_items() == items.size());
  CHECK(ds.num_users() == 943);
  CHECK(ds.num_items() == 1682);
}

TEST_CASE("chronological split sizes and soundness") {
  std::string log;
  for (int t = 0; t < 10; ++t) log += "u" + std::to_string(t % 2) + "\ti" + std::to_string(t % 3) + "\t" + std::to_string(t) + "\n";
  const Split s = chronological_split(testutil::dataset_from(log), 0.2);
  CHECK(s.train.interactions.size() == 8);
  CHECK(s.test.interactions.size() <= 2);
  CHECK(s.report.test_events_before_drop == 2);
  std::int64_t max_train = 0, min_test = 1 << 30;
  for (const auto& x : s.train.interactions) max_train = std::max(max_train, x.timestamp);
  for (const auto& x : s.test.interactions) min_test = std::min(min_test, x.timestamp);
  CHECK(max_train <= min_test);
  CHECK_THROWS_AS(chronological_split(testutil::dataset_from(log), 0.0), InvalidFraction);
  CHECK_THROWS_AS(chronological_split(testutil::dataset_from(log), 1.0), InvalidFraction);
}

TEST_CASE("equal timestamps keep input order") {
  std::string log;
  for (int k = 0; k < 10; ++k) log += "u" + std::to_string(k % 3) + "\ti" + std::to_string(k % 4) + "\t7\n";
  const Dataset ds = testutil::dataset_from(log);
  const Split s = chronological_split(ds, 0.2);
  REQUIRE(s.train.interactions.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) CHECK(s.train.interactions[k] == ds.interactions[k]);
  CHECK(s.report.test_events_before_drop == 2);
}

TEST_CASE("cold-start test events are dropped and counted") {
  const std::string log = "a\tx\t1\nb\ty\t2\na\ty\t3\nb\tx\t4\nnew\tx\t5\n";
  const Split s = chronological_split(testutil::dataset_from(log), 0.2);
  CHECK(s.test.interactions.empty());
  CHECK(s.report.dropped_cold_user == 1);
  CHECK(s.report.dropped() == 1);
  CHECK(s.report.to_text().find("dropped_cold_user=1") != std::string::npos);

  const Split s2 = chronological_split(testutil::dataset_from("a\tx\t1\nb\ty\t2\na\tnew\t3\n"), 0.3);
  CHECK(s2.report.dropped_cold_item == 1);
}

TEST_CASE("histories are chronological, truncated and per user") {
  const Dataset ds = testutil::dataset_from("u\ta\t1\nv\tq\t2\nu\tb\t3\nv\tr\t4\nu\tc\t5\n");
  const HistoryMap h2 = build_user_histories(ds, 2);
  const auto item = [&](const char* raw) { return ds.items->find(raw); };
  REQUIRE(h2.count(0) == 1);
  CHECK(h2.at(0).items == std::vector<ItemIndex>{item("b"), item("c")});
  const HistoryMap h100 = build_user_histories(ds, 100);
  CHECK(h100.at(0).items == std::vector<ItemIndex>{item("a"), item("b"), item("c")});
  CHECK(h100.at(1).items == std::vector<ItemIndex>{item("q"), item("r")});
  CHECK_THROWS_AS(build_user_histories(ds, 0), ConfigError);
}

TEST_CASE("negative sampling: forced set, errors, determinism") {
  Rng rng(1);
  const std::vector<ItemIndex> excl = {0};
  auto s = sample_negatives(rng, 5, excl, 4);
  std::sort(s.begin(), s.end());
  CHECK(s == std::vector<ItemIndex>{1, 2, 3, 4});
  CHECK_THROWS_AS(sample_negatives(rng, 5, excl, 5), CorpusExhausted);
  CHECK_THROWS_AS(sample_negatives(rng, 5, excl, 0), CorpusExhausted);
  Rng a(9), b(9);
  CHECK(sample_negatives(a, 1000, excl, 20) == sample_negatives(b, 1000, excl, 20));
}

TEST_CASE("negative sampling frequency is uniform") {
  Rng rng(3);
  std::vector<std::size_t> counts(10, 0);
  const std::size_t trials = 100000;
  for (std::size_t t = 0; t < trials; ++t) ++counts[sample_negatives(rng, 10, {}, 1)[0]];
  for (std::size_t c : counts) CHECK(std::abs(double(c) / trials - 0.1) < 0.01);
}

TEST_CASE("negative sampling never returns excluded or duplicate items") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::uint32_t n_items = 2 + gen() % 60;
    std::vector<ItemIndex> excl;
    for (std::uint32_t i = 0; i < n_items; ++i) {
      if (gen() % 3 == 0) excl.push_back(i);
    }
    if (excl.size() + 1 > n_items) continue;
    const std::size_t n = 1 + gen() % (n_items - excl.size());
    Rng rng(gen());
    const auto s = sample_negatives(rng, n_items, excl, n);
    REQUIRE(s.size() == n);
    std::set<ItemIndex> uniq(s.begin(), s.end());
    CHECK(uniq.size() == n);
    for (ItemIndex x : s) {
      CHECK(x < n_items);
      CHECK(std::find(excl.begin(), excl.end(), x) == excl.end());
    }
  }
}

TEST_CASE("train positives are sorted and unique") {
  const Dataset ds = testutil::dataset_from("u\tb\t1\nu\ta\t2\nu\tb\t3\nv\ta\t4\n");
  const auto pos = build_train_positives(ds);
  REQUIRE(pos.size() == 2);
  CHECK(pos[0] == std::vector<ItemIndex>{0, 1});
  CHECK(pos[1] == std::vector<ItemIndex>{1});
}
