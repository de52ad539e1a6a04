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

#ifndef POSAUG_EVALUATION_HPP_
#define POSAUG_EVALUATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "posaug/common.hpp"
#include "posaug/data.hpp"
#include "posaug/model.hpp"
#include "posaug/retrieval_index.hpp"

namespace posaug {

struct EvalConfig {
  std::vector<std::size_t> ks = {50, 100, 200};
  std::vector<std::size_t> diversity_depths = {100, 500, 1000};
  // Remove the evaluated user's train items from the candidate set.
  bool exclude_train = true;
};

struct RankingMetrics {
  std::size_t num_events = 0;
  std::map<std::size_t, double> hr;
  std::map<std::size_t, double> ndcg;
  std::map<std::size_t, std::size_t> diversity;

  bool operator==(const RankingMetrics&) const = default;
};

using Rank = std::optional<std::size_t>;  // nullopt = miss

// 1 + number of non-excluded items ranked before the true item (higher
// cosine, or equal cosine and lower index). A miss when the true item is
// itself excluded.
Rank rank_of_true_item(std::span<const double> user_repr, ItemIndex true_item,
                       const EmbeddingIndex& items, std::span<const ItemIndex> exclude);

// (HR@k, NDCG@k) with a single relevant item per event. Throws
// EmptyEvaluation for an empty rank list.
std::pair<double, double> hr_ndcg(std::span<const Rank> ranks, std::size_t k);

// |union over users of the first k items of each list|
std::size_t diversity_count(const std::map<UserIndex, std::vector<ItemIndex>>& per_user_topk,
                            std::size_t k);

struct EventRank {
  UserIndex user = 0;
  ItemIndex item = 0;
  Rank rank;
};

struct Evaluation {
  RankingMetrics metrics;
  std::vector<EventRank> ranks;  // test order
  std::map<UserIndex, std::vector<ItemIndex>> topk;  // depth = max diversity depth
};

// Scores every test event against the full item corpus. Users are encoded
// from their train histories; work is parallel per test user and aggregated
// in a fixed order.
Evaluation evaluate_full(const ModelParams& params, const Dataset& test,
                         const HistoryMap& histories,
                         std::span<const std::vector<ItemIndex>> train_positives,
                         const EvalConfig& cfg, bool parallel = true);

RankingMetrics evaluate(const ModelParams& params, const Dataset& test,
                        const HistoryMap& histories,
                        std::span<const std::vector<ItemIndex>> train_positives,
                        const EvalConfig& cfg);

// "user\titem\trank" with rank "miss" for misses.
void write_ranks_tsv(std::ostream& out, std::span<const EventRank> ranks,
                     const Vocabulary& users, const Vocabulary& items);

}  // namespace posaug

#endif  // POSAUG_EVALUATION_HPP_
