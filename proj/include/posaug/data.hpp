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

#ifndef POSAUG_DATA_HPP_
#define POSAUG_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "posaug/common.hpp"

namespace posaug {

// One implicit-positive (click) event.
struct Interaction {
  UserIndex user = 0;
  ItemIndex item = 0;
  std::int64_t timestamp = 0;

  bool operator==(const Interaction&) const = default;
};

// Bijective raw-id <-> contiguous-index map, indices assigned in first-seen
// order.
class Vocabulary {
 public:
  std::uint32_t intern(const std::string& raw);
  std::uint32_t size() const { return static_cast<std::uint32_t>(raw_.size()); }
  const std::string& raw(std::uint32_t index) const { return raw_.at(index); }
  // Returns size() when the raw id is unknown.
  std::uint32_t find(const std::string& raw) const;

 private:
  std::vector<std::string> raw_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Dataset {
  std::vector<Interaction> interactions;
  // Shared between a dataset and the splits derived from it.
  std::shared_ptr<const Vocabulary> users;
  std::shared_ptr<const Vocabulary> items;

  std::uint32_t num_users() const { return users ? users->size() : 0; }
  std::uint32_t num_items() const { return items ? items->size() : 0; }
};

// Loads a tab-separated (user, item, timestamp) log. Extra columns are
// ignored; exact duplicate lines are dropped.
Dataset load_interactions(const std::filesystem::path& path);
Dataset parse_interactions(std::istream& in);

struct SplitReport {
  std::size_t total_events = 0;
  std::size_t train_events = 0;
  std::size_t test_events_before_drop = 0;
  std::size_t dropped_cold_user = 0;  // user unseen in train
  std::size_t dropped_cold_item = 0;  // item unseen in train (user seen)
  std::size_t test_events = 0;

  std::size_t dropped() const { return dropped_cold_user + dropped_cold_item; }
  // Key-value text block.
  std::string to_text() const;
};

struct Split {
  Dataset train;
  Dataset test;
  SplitReport report;
};

// Sorts by (timestamp, input order) and holds out the last
// ceil(test_fraction * N) events. Test events whose user or item never occurs
// in train are dropped and counted.
Split chronological_split(const Dataset& ds, double test_fraction);

struct UserHistory {
  UserIndex user = 0;
  std::vector<ItemIndex> items;  // chronological, most recent last
};

using HistoryMap = std::map<UserIndex, UserHistory>;

// Per-user training histories truncated to the last max_history events.
// Users without train events are absent.
HistoryMap build_user_histories(const Dataset& train, std::size_t max_history);

// Sorted, deduplicated set of train items per user (indexed by user; empty
// for users without train events).
std::vector<std::vector<ItemIndex>> build_train_positives(const Dataset& train);

// n distinct items drawn uniformly from [0, num_items) minus `exclude`.
std::vector<ItemIndex> sample_negatives(Rng& rng, std::uint32_t num_items,
                                        std::span<const ItemIndex> exclude,
                                        std::size_t n);

}  // namespace posaug

#endif  // POSAUG_DATA_HPP_
