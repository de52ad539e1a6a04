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

#include "posaug/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>
#include <tuple>
#include <unordered_set>

namespace posaug {

std::uint32_t Vocabulary::intern(const std::string& raw) {
  auto [it, inserted] = index_.try_emplace(raw, size());
  if (inserted) raw_.push_back(raw);
  return it->second;
}

std::uint32_t Vocabulary::find(const std::string& raw) const {
  auto it = index_.find(raw);
  return it == index_.end() ? size() : it->second;
}

namespace {

// Splits the first three tab-separated fields; returns false on too few.
bool split_fields(std::string_view line, std::string_view (&out)[3]) {
  std::size_t start = 0;
  for (int f = 0; f < 3; ++f) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      if (f < 2) return false;
      out[f] = line.substr(start);
    } else {
      out[f] = line.substr(start, tab - start);
    }
    start = tab + 1;
  }
  return true;
}

}  // namespace

Dataset parse_interactions(std::istream& in) {
  auto users = std::make_shared<Vocabulary>();
  auto items = std::make_shared<Vocabulary>();
  Dataset ds;
  std::set<std::tuple<UserIndex, ItemIndex, std::int64_t>> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string_view fields[3];
    if (!split_fields(line, fields)) {
      throw MalformedLine(line_no, "expected at least 3 tab-separated columns");
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw MalformedLine(line_no, "empty user or item id");
    }
    std::int64_t ts = 0;
    const auto* end = fields[2].data() + fields[2].size();
    auto [ptr, ec] = std::from_chars(fields[2].data(), end, ts);
    if (ec != std::errc() || ptr != end) {
      throw MalformedLine(line_no, "timestamp is not an integer");
    }

    const UserIndex u = users->intern(std::string(fields[0]));
    const ItemIndex i = items->intern(std::string(fields[1]));
    if (seen.emplace(u, i, ts).second) ds.interactions.push_back({u, i, ts});
  }
  if (ds.interactions.empty()) throw EmptyDataset("no interactions in input");
  ds.users = std::move(users);
  ds.items = std::move(items);
  return ds;
}

Dataset load_interactions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return parse_interactions(in);
}

std::string SplitReport::to_text() const {
  std::ostringstream os;
  os << "total_events=" << total_events << '\n'
     << "train_events=" << train_events << '\n'
     << "test_events_before_drop=" << test_events_before_drop << '\n'
     << "dropped_cold_user=" << dropped_cold_user << '\n'
     << "dropped_cold_item=" << dropped_cold_item << '\n'
     << "dropped_cold_start=" << dropped() << '\n'
     << "test_events=" << test_events << '\n';
  return os.str();
}

Split chronological_split(const Dataset& ds, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidFraction("test_fraction must lie in (0,1), got " +
                          std::to_string(test_fraction));
  }
  if (ds.interactions.empty()) throw EmptyDataset("cannot split an empty dataset");

  const std::size_t n = ds.interactions.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.interactions[a].timestamp < ds.interactions[b].timestamp;
  });

  // The epsilon keeps products like 0.2 * 10 from rounding up to 3.
  const auto n_test = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(test_fraction * n - 1e-9)));
  const std::size_t n_train = n - n_test;

  Split out;
  out.train.users = out.test.users = ds.users;
  out.train.items = out.test.items = ds.items;
  out.train.interactions.reserve(n_train);
  std::vector<char> user_seen(ds.num_users(), 0);
  std::vector<char> item_seen(ds.num_items(), 0);
  for (std::size_t r = 0; r < n_train; ++r) {
    const Interaction& x = ds.interactions[order[r]];
    out.train.interactions.push_back(x);
    user_seen[x.user] = 1;
    item_seen[x.item] = 1;
  }

  SplitReport& rep = out.report;
  rep.total_events = n;
  rep.train_events = n_train;
  rep.test_events_before_drop = n_test;
  for (std::size_t r = n_train; r < n; ++r) {
    const Interaction& x = ds.interactions[order[r]];
    if (!user_seen[x.user]) {
      ++rep.dropped_cold_user;
    } else if (!item_seen[x.item]) {
      ++rep.dropped_cold_item;
    } else {
      out.test.interactions.push_back(x);
    }
  }
  rep.test_events = out.test.interactions.size();
  return out;
}

HistoryMap build_user_histories(const Dataset& train, std::size_t max_history) {
  if (max_history == 0) throw ConfigError("max_history must be >= 1");
  std::vector<std::size_t> order(train.interactions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return train.interactions[a].timestamp < train.interactions[b].timestamp;
  });

  HistoryMap out;
  for (std::size_t r : order) {
    const Interaction& x = train.interactions[r];
    UserHistory& h = out[x.user];
    h.user = x.user;
    h.items.push_back(x.item);
  }
  for (auto& [user, h] : out) {
    if (h.items.size() > max_history) {
      h.items.erase(h.items.begin(),
                    h.items.end() - static_cast<std::ptrdiff_t>(max_history));
    }
  }
  return out;
}

std::vector<std::vector<ItemIndex>> build_train_positives(const Dataset& train) {
  std::vector<std::vector<ItemIndex>> out(train.num_users());
  for (const Interaction& x : train.interactions) out[x.user].push_back(x.item);
  for (auto& items : out) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return out;
}

std::vector<ItemIndex> sample_negatives(Rng& rng, std::uint32_t num_items,
                                        std::span<const ItemIndex> exclude,
                                        std::size_t n) {
  std::unordered_set<ItemIndex> excluded;
  for (ItemIndex e : exclude) {
    if (e < num_items) excluded.insert(e);
  }
  const std::size_t available = num_items - excluded.size();
  if (n == 0 || available < n) {
    throw CorpusExhausted("cannot draw " + std::to_string(n) +
                          " negatives from " + std::to_string(available) +
                          " eligible items");
  }

  std::vector<ItemIndex> out;
  out.reserve(n);
  if (2 * n <= available) {
    // Rejection sampling; the expected number of redraws is below one per
    // accepted item.
    std::uniform_int_distribution<ItemIndex> pick(0, num_items - 1);
    while (out.size() < n) {
      const ItemIndex c = pick(rng);
      if (excluded.count(c)) continue;
      if (std::find(out.begin(), out.end(), c) != out.end()) continue;
      out.push_back(c);
    }
    return out;
  }

  std::vector<ItemIndex> pool;
  pool.reserve(available);
  for (ItemIndex i = 0; i < num_items; ++i) {
    if (!excluded.count(i)) pool.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
    std::swap(pool[j], pool[pick(rng)]);
    out.push_back(pool[j]);
  }
  return out;
}

}  // namespace posaug
