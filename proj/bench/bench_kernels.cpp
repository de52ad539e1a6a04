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

// Serial reference against the OpenMP kernels. Thread count follows
// OMP_NUM_THREADS / POSAUG_THREADS as usual.

#include <benchmark/benchmark.h>

#include <cstdlib>
#include <random>
#include <vector>

#include "posaug/kernels.hpp"
#include "posaug/model.hpp"
#include "posaug/retrieval_index.hpp"

namespace {

using posaug::Matrix;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& x : m.row(r)) x = normal(rng);
  }
  return m;
}

template <bool Parallel>
void BM_Affine(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix in = random_matrix(rows, 64, 1), w = random_matrix(64, 32, 2);
  const std::vector<double> bias(32, 0.1);
  Matrix out(rows, 32);
  for (auto _ : state) {
    if constexpr (Parallel) {
      posaug::kernels::affine(in.view(), w.view(), bias, out.view());
    } else {
      posaug::kernels::serial::affine(in.view(), w.view(), bias, out.view());
    }
    benchmark::DoNotOptimize(out.view().data);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void BM_DotScores(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix q = random_matrix(256, 32, 3), items = random_matrix(rows, 32, 4);
  Matrix scores(256, rows);
  for (auto _ : state) {
    if constexpr (Parallel) {
      posaug::kernels::dot_scores(q.view(), items.view(), scores.view());
    } else {
      posaug::kernels::serial::dot_scores(q.view(), items.view(), scores.view());
    }
    benchmark::DoNotOptimize(scores.view().data);
  }
  state.SetItemsProcessed(state.iterations() * 256 * static_cast<std::int64_t>(rows));
}

template <bool Parallel>
void BM_TopkBatch(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Matrix items = random_matrix(rows, 32, 5), q = random_matrix(256, 32, 6);
  const auto index = posaug::EmbeddingIndex::build(items.view());
  for (auto _ : state) {
    auto hits = index.topk_batch(q.view(), 100, {}, Parallel);
    benchmark::DoNotOptimize(hits.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}

template <bool Parallel>
void BM_BatchLossAndGrad(benchmark::State& state) {
  // ML-100K-sized vocabularies, batch 256, 20 negatives, 3 augmented items.
  const std::size_t users = 943, items = 1682, batch = 256;
  posaug::HyperParams hp;
  posaug::Rng rng(7);
  const auto params = posaug::ModelParams::initialize(users, items, hp, rng);
  std::vector<std::vector<posaug::ItemIndex>> histories(users);
  std::vector<posaug::TrainExample> examples(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    auto& ex = examples[b];
    ex.user = static_cast<posaug::UserIndex>(rng() % users);
    ex.pos_item = static_cast<posaug::ItemIndex>(rng() % items);
    auto& h = histories[ex.user];
    if (h.empty()) {
      for (int i = 0; i < 50; ++i) h.push_back(static_cast<posaug::ItemIndex>(rng() % items));
    }
    ex.history = h;
    for (std::size_t n = 0; n < hp.negatives; ++n) {
      ex.negatives.push_back(static_cast<posaug::ItemIndex>(rng() % items));
    }
    for (int a = 0; a < 3; ++a) {
      ex.aug.push_back({static_cast<posaug::ItemIndex>(rng() % items), 1.0 / 3.0});
    }
  }
  const posaug::LossSpec spec{0.1, posaug::MixupMode::kOutputSpace};
  std::vector<double> grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(posaug::batch_loss_and_grad(params, examples, spec, &grad, Parallel));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

BENCHMARK(BM_Affine<false>)->Arg(1024)->Arg(8192);
BENCHMARK(BM_Affine<true>)->Arg(1024)->Arg(8192);
BENCHMARK(BM_DotScores<false>)->Arg(1682)->Arg(20000);
BENCHMARK(BM_DotScores<true>)->Arg(1682)->Arg(20000);
BENCHMARK(BM_TopkBatch<false>)->Arg(1682)->Arg(20000);
BENCHMARK(BM_TopkBatch<true>)->Arg(1682)->Arg(20000);
BENCHMARK(BM_BatchLossAndGrad<false>);
BENCHMARK(BM_BatchLossAndGrad<true>);

}  // namespace

BENCHMARK_MAIN();
