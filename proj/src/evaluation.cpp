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

#include "posaug/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_set>

namespace posaug {
namespace {

// Rank of `target` among the non-excluded entries of `scores`.
Rank rank_in(std::span<const double> scores, std::span<const char> excluded,
             ItemIndex target) {
  if (!excluded.empty() && excluded[target]) return std::nullopt;
  const double st = scores[target];
  std::size_t before = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == target || (!excluded.empty() && excluded[j])) continue;
    if (scores[j] > st || (scores[j] == st && j < target)) ++before;
  }
  return before + 1;
}

}  // namespace

Rank rank_of_true_item(std::span<const double> user_repr, ItemIndex true_item,
                       const EmbeddingIndex& items, std::span<const ItemIndex> exclude) {
  if (true_item >= items.rows()) throw IndexOutOfRange("true item out of range");
  std::vector<double> scores(items.rows());
  items.scores(user_repr, scores);
  std::vector<char> mask(items.rows(), 0);
  for (ItemIndex e : exclude) {
    if (e < mask.size()) mask[e] = 1;
  }
  return rank_in(scores, mask, true_item);
}

std::pair<double, double> hr_ndcg(std::span<const Rank> ranks, std::size_t k) {
  if (ranks.empty()) throw EmptyEvaluation("no events to evaluate");
  if (k == 0) throw ConfigError("k must be >= 1");
  double hits = 0.0;
  double gain = 0.0;
  for (const Rank& r : ranks) {
    if (!r || *r > k) continue;
    hits += 1.0;
    gain += 1.0 / std::log2(static_cast<double>(*r) + 1.0);
  }
  const double n = static_cast<double>(ranks.size());
  return {hits / n, gain / n};
}

std::size_t diversity_count(const std::map<UserIndex, std::vector<ItemIndex>>& per_user_topk,
                            std::size_t k) {
  std::unordered_set<ItemIndex> seen;
  for (const auto& [user, list] : per_user_topk) {
    const std::size_t n = std::min(k, list.size());
    seen.insert(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return seen.size();
}

Evaluation evaluate_full(const ModelParams& params, const Dataset& test,
                         const HistoryMap& histories,
                         std::span<const std::vector<ItemIndex>> train_positives,
                         const EvalConfig& cfg, bool parallel) {
  if (test.interactions.empty()) throw EmptyEvaluation("test split is empty");

  std::vector<UserIndex> users;
  for (const Interaction& x : test.interactions) users.push_back(x.user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::vector<std::span<const ItemIndex>> hists(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    auto it = histories.find(users[i]);
    if (it != histories.end()) hists[i] = it->second.items;
  }
  const Matrix user_reprs = encode_users(params, users, hists);
  const Matrix item_reprs = encode_all_items(params);
  const EmbeddingIndex index = EmbeddingIndex::build(item_reprs.view());

  std::vector<std::vector<std::size_t>> events_of(users.size());
  for (std::size_t e = 0; e < test.interactions.size(); ++e) {
    const auto pos = std::lower_bound(users.begin(), users.end(),
                                      test.interactions[e].user) - users.begin();
    events_of[static_cast<std::size_t>(pos)].push_back(e);
  }

  std::size_t depth = 0;
  for (std::size_t d : cfg.diversity_depths) depth = std::max(depth, d);

  Evaluation out;
  out.ranks.resize(test.interactions.size());
  std::vector<std::vector<ItemIndex>> lists(users.size());
  const std::size_t ni = index.rows();

  const auto run_user = [&](std::size_t i) {
    std::vector<double> scores(ni);
    index.scores(user_reprs.row(i), scores);
    std::vector<char> mask;
    if (cfg.exclude_train && users[i] < train_positives.size()) {
      mask.assign(ni, 0);
      for (ItemIndex it : train_positives[users[i]]) mask[it] = 1;
    }
    for (std::size_t e : events_of[i]) {
      const Interaction& x = test.interactions[e];
      out.ranks[e] = {x.user, x.item, rank_in(scores, mask, x.item)};
    }
    if (depth > 0) {
      const std::vector<Hit> hits = select_topk(scores, depth, mask);
      lists[i].reserve(hits.size());
      for (const Hit& h : hits) lists[i].push_back(h.row);
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(users.size()); ++i) {
      run_user(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < users.size(); ++i) run_user(i);
  }

  for (std::size_t i = 0; i < users.size(); ++i) out.topk[users[i]] = std::move(lists[i]);

  std::vector<Rank> ranks(out.ranks.size());
  for (std::size_t e = 0; e < ranks.size(); ++e) ranks[e] = out.ranks[e].rank;
  RankingMetrics& m = out.metrics;
  m.num_events = ranks.size();
  for (std::size_t k : cfg.ks) {
    const auto [hr, ndcg] = hr_ndcg(ranks, k);
    m.hr[k] = hr;
    m.ndcg[k] = ndcg;
  }
  for (std::size_t d : cfg.diversity_depths) m.diversity[d] = diversity_count(out.topk, d);
  return out;
}

RankingMetrics evaluate(const ModelParams& params, const Dataset& test,
                        const HistoryMap& histories,
                        std::span<const std::vector<ItemIndex>> train_positives,
                        const EvalConfig& cfg) {
  return evaluate_full(params, test, histories, train_positives, cfg).metrics;
}

void write_ranks_tsv(std::ostream& out, std::span<const EventRank> ranks,
                     const Vocabulary& users, const Vocabulary& items) {
  out << "user\titem\trank\n";
  for (const EventRank& r : ranks) {
    out << users.raw(r.user) << '\t' << items.raw(r.item) << '\t';
    if (r.rank) {
      out << *r.rank;
    } else {
      out << "miss";
    }
    out << '\n';
  }
}

}  // namespace posaug
