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

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "posaug/kernels.hpp"
#include "posaug/model.hpp"

using namespace posaug;

TEST_CASE("loss: uniform logits give ln(n+1)") {
  const std::vector<double> u = {0.0, 0.0}, v = {1.0, 2.0};
  const std::vector<Representation> negs(3, Representation{3.0, -1.0});
  CHECK(std::abs(sampled_softmax_loss(u, v, negs) - std::log(4.0)) < 1e-12);
}

TEST_CASE("loss: pos=1, negs=[0,0]") {
  const std::vector<double> negs = {0.0, 0.0};
  const double want = std::log1p(2.0 * std::exp(-1.0));
  CHECK(std::abs(softmax_loss_from_logits(1.0, negs) - want) < 1e-14);
  CHECK(std::abs(want - 0.5514447) < 1e-7);
  const std::vector<double> u = {1.0}, v = {1.0};
  const std::vector<Representation> vn = {{0.0}, {0.0}};
  CHECK(std::abs(sampled_softmax_loss(u, v, vn) - want) < 1e-14);
}

TEST_CASE("loss: extreme logit stays finite and tiny") {
  const std::vector<double> negs = {0.0, 0.0, 0.0};
  const double l = softmax_loss_from_logits(50.0, negs);
  CHECK(std::isfinite(l));
  CHECK(l < 1e-20);
  CHECK(l > 0.0);
  // log(1 + 3 e^-50) in extended precision.
  const long double ref = std::log1p(3.0L * std::exp(-50.0L));
  CHECK(std::abs(l - static_cast<double>(ref)) <= 1e-12 * static_cast<double>(ref));
}

TEST_CASE("loss: finite and non-negative up to |logit| = 500, permutation invariant") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logit(-500.0, 500.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double pos = logit(rng);
    std::vector<double> negs(1 + rng() % 6);
    for (double& n : negs) n = logit(rng);
    const double l = softmax_loss_from_logits(pos, negs);
    REQUIRE(std::isfinite(l));
    CHECK(l >= 0.0);
    // Positive whenever the exact value exceeds the smallest subnormal.
    const double gap = pos - *std::max_element(negs.begin(), negs.end());
    if (gap < 700.0) CHECK(l > 0.0);
    std::vector<double> shuffled = negs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(softmax_loss_from_logits(pos, shuffled) == doctest::Approx(l).epsilon(1e-14));
    CHECK(std::abs(l - oracle::softmax_loss(pos, negs)) <= 1e-10 * std::max(1.0, l));
  }
}

TEST_CASE("cosine identities") {
  const std::vector<double> a = {1.0, 1.0}, b = {1.0, 0.0}, c = {0.0, 3.0};
  CHECK(std::abs(cosine(a, b) - std::sqrt(0.5)) < 1e-9);
  CHECK(cosine(b, c) == 0.0);
  CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(a, std::vector<double>{0.0, 0.0}) == 0.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto x = testutil::random_vector(rng, 7), y = testutil::random_vector(rng, 7);
    CHECK(cosine(x, y) == cosine(y, x));
    std::vector<double> sx = x;
    for (double& v : sx) v *= 3.7;
    CHECK(cosine(sx, y) == doctest::Approx(cosine(x, y)).epsilon(1e-12));
    CHECK(std::abs(cosine(x, y)) <= 1.0 + 1e-15);
  }
}

TEST_CASE("encoders: zero params give zero vectors") {
  const ModelParams p(2, 3, 4, 8);
  const std::vector<ItemIndex> hist = {0, 2};
  for (double x : encode_user(p, 1, hist)) CHECK(x == 0.0);
  for (double x : encode_item(p, 2)) CHECK(x == 0.0);
  CHECK_THROWS_AS(encode_item(p, 3), IndexOutOfRange);
  CHECK_THROWS_AS(encode_user(p, 2, {}), IndexOutOfRange);
}

TEST_CASE("encoders: empty history equals a zero-embedding history") {
  std::mt19937_64 rng(6);
  ModelParams p = oracle::random_params(2, 3, 4, 8, rng);
  for (std::size_t j = 0; j < 4; ++j) p.tensor(Tensor::kItemEmb)(1, j) = 0.0;
  const std::vector<ItemIndex> hist = {1};
  CHECK(encode_user(p, 0, {}) == encode_user(p, 0, hist));
}

TEST_CASE("encoders: identity item tower returns the basis embedding") {
  HyperParams hp;
  hp.dim = 3;
  hp.hidden = 3;
  ModelParams p(1, 3, 3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    p.tensor(Tensor::kItemW1)(i, i) = 1.0;
    p.tensor(Tensor::kItemW2)(i, i) = 1.0;
    p.tensor(Tensor::kItemEmb)(i, i) = 1.0;
  }
  for (ItemIndex i = 0; i < 3; ++i) {
    std::vector<double> e(3, 0.0);
    e[i] = 1.0;
    CHECK(encode_item(p, i) == e);
  }
}

TEST_CASE("encoders match a scalar forward pass; batched == single") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams p = oracle::random_params(4, 9, 5, 7, rng);
    const std::vector<ItemIndex> hist = {static_cast<ItemIndex>(rng() % 9),
                                         static_cast<ItemIndex>(rng() % 9)};
    const auto got = encode_user(p, 2, hist);
    const auto want = oracle::user_forward(p, 2, hist);
    for (std::size_t j = 0; j < 5; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
    for (ItemIndex i = 0; i < 9; ++i) {
      const auto gi = encode_item(p, i);
      const auto wi = oracle::item_forward(p, i);
      for (std::size_t j = 0; j < 5; ++j) CHECK(gi[j] == doctest::Approx(wi[j]).epsilon(1e-12));
    }

    const Matrix items = encode_all_items(p);
    for (ItemIndex i = 0; i < 9; ++i) {
      const auto row = items.row(i);
      CHECK(std::vector<double>(row.begin(), row.end()) == encode_item(p, i));
    }
    const std::vector<UserIndex> users = {0, 2, 3};
    const std::vector<ItemIndex> h0;
    const std::vector<std::span<const ItemIndex>> hs = {h0, hist, hist};
    const Matrix ur = encode_users(p, users, hs);
    for (std::size_t r = 0; r < users.size(); ++r) {
      const auto row = ur.row(r);
      CHECK(std::vector<double>(row.begin(), row.end()) ==
            encode_user(p, users[r], hs[r]));
    }
  }
}

TEST_CASE("initialization follows the documented ranges") {
  HyperParams hp;
  hp.dim = 8;
  Rng rng(1);
  const ModelParams p = ModelParams::initialize(20, 30, hp, rng);
  CHECK(p.hidden() == 16);
  for (Tensor t : {Tensor::kItemEmb, Tensor::kUserEmb}) {
    const auto v = p.tensor(t);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v.data[i]) <= 0.05);
  }
  for (Tensor t : {Tensor::kUserB1, Tensor::kUserB2, Tensor::kItemB1, Tensor::kItemB2}) {
    const auto v = p.tensor(t);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.data[i] == 0.0);
  }
  const auto w = p.tensor(Tensor::kUserW1);
  const double limit = std::sqrt(6.0 / double(w.rows + w.cols));
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(w.data[i]) <= limit);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_grad_instance(rng, false);
    CHECK(oracle::gradient_error(g, LossSpec{}) < 1e-3);
  }
}

TEST_CASE("gradient on a 3-user/4-item toy") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    oracle::GradInstance g;
    do {
      g.params = oracle::random_params(3, 4, 2, 4, rng);
      g.histories = {{0, 1}, {2}, {}};
      g.batch.clear();
      for (UserIndex u = 0; u < 3; ++u) {
        TrainExample ex;
        ex.user = u;
        ex.pos_item = u;
        ex.history = g.histories[u];
        for (ItemIndex i = 0; i < 4; ++i) {
          if (i != u) ex.negatives.push_back(i);
        }
        g.batch.push_back(ex);
      }
    } while (oracle::near_kink(g, 2e-2));
    CHECK(oracle::gradient_error(g, LossSpec{}) < 1e-3);
  }
}

TEST_CASE("serial and parallel batch gradients are bitwise equal") {
  kernels::set_num_threads(4);
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    for (MixupMode mode : {MixupMode::kOutputSpace, MixupMode::kRepresentationSpace}) {
      const auto g = oracle::random_grad_instance(rng, true);
      std::vector<double> a, b;
      const LossSpec spec{0.3, mode};
      const double la = batch_loss_and_grad(g.params, g.batch, spec, &a, true);
      const double lb = batch_loss_and_grad(g.params, g.batch, spec, &b, false);
      CHECK(la == lb);
      CHECK(a == b);
    }
  }
}

TEST_CASE("overfitting one example with beta1 = beta2 = 0") {
  HyperParams hp;
  hp.dim = 4;
  hp.negatives = 3;
  hp.lr = 0.01;
  hp.adam_beta1 = 0.0;
  hp.adam_beta2 = 0.0;
  Rng init(2);
  ModelParams p = ModelParams::initialize(2, 4, hp, init);
  const std::vector<ItemIndex> hist = {1};
  std::vector<TrainExample> batch(1);
  batch[0].user = 0;
  batch[0].pos_item = 2;
  batch[0].history = hist;
  Rng rng(3);
  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 50; ++step) {
    // With 4 items and 3 negatives the negative set is forced.
    const double loss = train_step(p, batch, hp, LossSpec{}, rng);
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(p.all_finite());
}

TEST_CASE("train_step is deterministic per seed") {
  HyperParams hp;
  hp.dim = 6;
  hp.negatives = 4;
  const auto run = [&] {
    Rng init(5), rng(6);
    ModelParams p = ModelParams::initialize(5, 12, hp, init);
    std::vector<std::vector<ItemIndex>> hist = {{1, 2}, {3}, {}, {4, 5, 6}, {7}};
    for (int step = 0; step < 10; ++step) {
      std::vector<TrainExample> batch(5);
      for (UserIndex u = 0; u < 5; ++u) {
        batch[u].user = u;
        batch[u].pos_item = (u * 3 + step) % 12;
        batch[u].history = hist[u];
      }
      train_step(p, batch, hp, LossSpec{}, rng);
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("train_step surfaces corpus exhaustion") {
  HyperParams hp;
  hp.dim = 2;
  hp.negatives = 5;
  Rng init(1), rng(2);
  ModelParams p = ModelParams::initialize(1, 3, hp, init);
  std::vector<TrainExample> batch(1);
  CHECK_THROWS_AS(train_step(p, batch, hp, LossSpec{}, rng), CorpusExhausted);
}

TEST_CASE("hyper-parameter validation") {
  HyperParams hp;
  CHECK_NOTHROW(hp.validate());
  hp.lr = 0.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = HyperParams{};
  hp.beta_mix = -1.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = HyperParams{};
  hp.alpha = 0.0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
  hp = HyperParams{};
  hp.m = 0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
}
