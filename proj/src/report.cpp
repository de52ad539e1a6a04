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

#include "posaug/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <utility>

namespace posaug {
namespace {

template <class Key>
class SummaryBuilder {
 public:
  void add(const Key& user, const Key& pos, CandidateSource s, const Key& item,
           double weight, double select) {
    examples_.emplace(user, pos);
    all_items_.insert(item);
    const auto si = static_cast<std::size_t>(s);
    items_[si].insert(item);
    SourceStats& st = out_.per_source[si];
    ++st.rows;
    st.mean_weight += weight;
    st.mean_select_score += select;
    const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(
                                                  std::max(0.0, weight) * 10.0));
    ++st.weight_histogram[bin];
    ++out_.rows;
  }

  AugmentationSummary finish() {
    out_.examples = examples_.size();
    out_.distinct_items = all_items_.size();
    for (std::size_t s = 0; s < kNumSources; ++s) {
      SourceStats& st = out_.per_source[s];
      st.distinct_items = items_[s].size();
      if (st.rows > 0) {
        st.mean_weight /= static_cast<double>(st.rows);
        st.mean_select_score /= static_cast<double>(st.rows);
      }
    }
    return out_;
  }

 private:
  AugmentationSummary out_;
  std::set<std::pair<Key, Key>> examples_;
  std::set<Key> all_items_;
  std::array<std::set<Key>, kNumSources> items_;
};

std::string fixed(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

Json losses_json(const std::vector<double>& l) {
  Json a = Json::array();
  for (double x : l) a.push_back(x);
  return a;
}

std::string metrics_header(const EvalConfig& eval) {
  std::string h = pad("model", 12);
  for (std::size_t k : eval.ks) h += pad("HR@" + std::to_string(k), 10);
  for (std::size_t k : eval.ks) h += pad("NDCG@" + std::to_string(k), 10);
  return h + "\n";
}

std::string metrics_row(const std::string& name, const RankingMetrics& m,
                        const EvalConfig& eval) {
  std::string r = pad(name, 12);
  for (std::size_t k : eval.ks) r += pad(fixed(m.hr.at(k)), 10);
  for (std::size_t k : eval.ks) r += pad(fixed(m.ndcg.at(k)), 10);
  return r + "\n";
}

RankingMetrics mean_of(std::span<const SeedRun> runs, RankingMetrics SeedRun::*field) {
  RankingMetrics out = runs.front().*field;
  for (auto& [k, v] : out.hr) v = 0.0;
  for (auto& [k, v] : out.ndcg) v = 0.0;
  for (const SeedRun& r : runs) {
    for (auto& [k, v] : out.hr) v += (r.*field).hr.at(k);
    for (auto& [k, v] : out.ndcg) v += (r.*field).ndcg.at(k);
  }
  const double n = static_cast<double>(runs.size());
  for (auto& [k, v] : out.hr) v /= n;
  for (auto& [k, v] : out.ndcg) v /= n;
  // Diversity is reported as the mean rounded down.
  for (auto& [d, c] : out.diversity) {
    std::size_t total = 0;
    for (const SeedRun& r : runs) total += (r.*field).diversity.at(d);
    c = total / runs.size();
  }
  return out;
}

Json delta_json(const RankingMetrics& a, const RankingMetrics& b) {
  Json j;
  Json hr, ndcg, div;
  for (const auto& [k, v] : a.hr) hr[std::to_string(k)] = v - b.hr.at(k);
  for (const auto& [k, v] : a.ndcg) ndcg[std::to_string(k)] = v - b.ndcg.at(k);
  for (const auto& [d, c] : a.diversity) {
    div[std::to_string(d)] =
        static_cast<std::int64_t>(c) - static_cast<std::int64_t>(b.diversity.at(d));
  }
  j["hr"] = hr;
  j["ndcg"] = ndcg;
  j["diversity"] = div;
  return j;
}

Json config_json(const RunConfig& cfg) {
  Json j;
  for (const std::string& key : config_keys()) j[key] = get_config_value(cfg, key);
  return j;
}

Json split_json(const SplitReport& s) {
  return Json{{"total_events", s.total_events},
              {"train_events", s.train_events},
              {"test_events_before_drop", s.test_events_before_drop},
              {"dropped_cold_user", s.dropped_cold_user},
              {"dropped_cold_item", s.dropped_cold_item},
              {"test_events", s.test_events}};
}

}  // namespace

AugmentationSummary summarize_augmentations(std::span<const AugmentationRow> rows) {
  SummaryBuilder<std::string> b;
  for (const AugmentationRow& r : rows) {
    b.add(r.user, r.pos_item, r.source, r.aug_item, r.weight, r.select_score);
  }
  return b.finish();
}

AugmentationSummary summarize_augmentations(std::span<const AugmentedExample> set) {
  SummaryBuilder<std::uint32_t> b;
  for (const AugmentedExample& ex : set) {
    for (CandidateSource s : kAllSources) {
      for (const AugItem& a : ex.aug[static_cast<std::size_t>(s)]) {
        b.add(ex.user, ex.pos_item, s, a.item, a.weight, a.select_score);
      }
    }
  }
  return b.finish();
}

Json metrics_to_json(const RankingMetrics& m) {
  Json j;
  j["num_events"] = m.num_events;
  Json hr, ndcg, div;
  for (const auto& [k, v] : m.hr) hr[std::to_string(k)] = v;
  for (const auto& [k, v] : m.ndcg) ndcg[std::to_string(k)] = v;
  for (const auto& [d, c] : m.diversity) div[std::to_string(d)] = c;
  j["hr"] = hr;
  j["ndcg"] = ndcg;
  j["diversity"] = div;
  return j;
}

RankingMetrics metrics_from_json(const Json& j) {
  RankingMetrics m;
  m.num_events = j.at("num_events").get<std::size_t>();
  for (const auto& [k, v] : j.at("hr").items()) m.hr[std::stoul(k)] = v.get<double>();
  for (const auto& [k, v] : j.at("ndcg").items()) m.ndcg[std::stoul(k)] = v.get<double>();
  for (const auto& [k, v] : j.at("diversity").items()) {
    m.diversity[std::stoul(k)] = v.get<std::size_t>();
  }
  return m;
}

Json summary_to_json(const AugmentationSummary& s) {
  Json j;
  j["examples"] = s.examples;
  j["rows"] = s.rows;
  j["distinct_items"] = s.distinct_items;
  Json per;
  for (CandidateSource c : kAllSources) {
    const SourceStats& st = s.per_source[static_cast<std::size_t>(c)];
    Json hist = Json::array();
    for (std::size_t h : st.weight_histogram) hist.push_back(h);
    per[source_name(c)] = Json{{"rows", st.rows},
                               {"distinct_items", st.distinct_items},
                               {"mean_weight", st.mean_weight},
                               {"mean_select_score", st.mean_select_score},
                               {"weight_histogram", hist}};
  }
  j["per_source"] = per;
  return j;
}

SeedRun make_seed_run(std::uint64_t seed, const PipelineResult& r) {
  SeedRun s;
  s.seed = seed;
  s.base = r.base.metrics;
  s.control = r.control.metrics;
  s.mixup = r.mixup.metrics;
  s.augmentation = summarize_augmentations(r.augmented);
  s.base_losses = r.base.losses;
  s.control_losses = r.control.losses;
  s.mixup_losses = r.mixup.losses;
  return s;
}

Json run_report_json(const RunConfig& cfg, const SplitReport& split,
                     std::span<const SeedRun> runs) {
  Json j;
  j["schema"] = kReportSchema;
  j["config"] = config_json(cfg);
  j["split"] = split_json(split);
  Json arr = Json::array();
  for (const SeedRun& r : runs) {
    Json run;
    run["seed"] = r.seed;
    run["models"] = Json{{"base", metrics_to_json(r.base)},
                         {"base_2x", metrics_to_json(r.control)},
                         {"augmented", metrics_to_json(r.mixup)}};
    run["augmentation"] = summary_to_json(r.augmentation);
    run["losses"] = Json{{"base", losses_json(r.base_losses)},
                         {"base_2x", losses_json(r.control_losses)},
                         {"augmented", losses_json(r.mixup_losses)}};
    arr.push_back(run);
  }
  j["runs"] = arr;
  if (!runs.empty()) {
    const RankingMetrics base = mean_of(runs, &SeedRun::base);
    const RankingMetrics control = mean_of(runs, &SeedRun::control);
    const RankingMetrics mixup = mean_of(runs, &SeedRun::mixup);
    j["summary"] = Json{{"num_seeds", runs.size()},
                        {"mean", Json{{"base", metrics_to_json(base)},
                                      {"base_2x", metrics_to_json(control)},
                                      {"augmented", metrics_to_json(mixup)}}},
                        {"delta_vs_base", delta_json(mixup, base)},
                        {"delta_vs_base_2x", delta_json(mixup, control)}};
  }
  return j;
}

std::string run_report_text(const RunConfig& cfg, const SplitReport& split,
                            std::span<const SeedRun> runs) {
  std::ostringstream os;
  os << "# split\n" << split.to_text() << "\n";
  const EvalConfig& eval = cfg.eval;
  for (const SeedRun& r : runs) {
    os << "# accuracy, seed " << r.seed << "\n" << metrics_header(eval)
       << metrics_row("base", r.base, eval) << metrics_row("base_2x", r.control, eval)
       << metrics_row("augmented", r.mixup, eval) << "\n";
  }
  if (runs.empty()) return os.str();
  const RankingMetrics base = mean_of(runs, &SeedRun::base);
  const RankingMetrics control = mean_of(runs, &SeedRun::control);
  const RankingMetrics mixup = mean_of(runs, &SeedRun::mixup);
  os << "# accuracy, mean over " << runs.size() << " seed(s)\n" << metrics_header(eval)
     << metrics_row("base", base, eval) << metrics_row("base_2x", control, eval)
     << metrics_row("augmented", mixup, eval) << "\n";

  os << "# distinct recalled items, mean over seeds\n" << pad("model", 12);
  for (const auto& [d, c] : base.diversity) os << pad("top-" + std::to_string(d), 10);
  os << "\n";
  for (const auto& [name, m] : {std::pair<const char*, const RankingMetrics*>{"base", &base},
                                {"base_2x", &control},
                                {"augmented", &mixup}}) {
    os << pad(name, 12);
    for (const auto& [d, c] : m->diversity) os << pad(std::to_string(c), 10);
    os << "\n";
  }
  os << pad("vs base", 12);
  for (const auto& [d, c] : mixup.diversity) {
    const double b = static_cast<double>(base.diversity.at(d));
    os << pad(b > 0 ? fixed(100.0 * static_cast<double>(c) / b, 0) + "%" : "n/a", 10);
  }
  os << "\n\n# augmentation (seed " << runs.front().seed << ")\n"
     << summary_text(runs.front().augmentation);
  return os.str();
}

Json ablation_report_json(const RunConfig& cfg, const SplitReport& split,
                          std::uint64_t seed, std::span<const AblationRow> rows) {
  Json j;
  j["schema"] = kAblationSchema;
  j["config"] = config_json(cfg);
  j["split"] = split_json(split);
  j["seed"] = seed;
  Json arr = Json::array();
  for (const AblationRow& r : rows) {
    Json src = Json::array();
    for (CandidateSource s : kAllSources) {
      if (r.sources[static_cast<std::size_t>(s)]) src.push_back(source_name(s));
    }
    arr.push_back(Json{{"name", r.name}, {"sources", src}, {"metrics", metrics_to_json(r.metrics)}});
  }
  j["rows"] = arr;
  return j;
}

std::string ablation_report_text(std::span<const AblationRow> rows, const EvalConfig& eval) {
  std::ostringstream os;
  os << "# ablation\n" << metrics_header(eval);
  for (const AblationRow& r : rows) os << metrics_row(r.name, r.metrics, eval);
  return os.str();
}

std::string summary_text(const AugmentationSummary& s) {
  std::ostringstream os;
  os << "examples_with_augmentation=" << s.examples << "\n"
     << "rows=" << s.rows << "\n"
     << "distinct_items=" << s.distinct_items << "\n";
  for (CandidateSource c : kAllSources) {
    const SourceStats& st = s.per_source[static_cast<std::size_t>(c)];
    os << source_name(c) << ".rows=" << st.rows << "\n"
       << source_name(c) << ".distinct_items=" << st.distinct_items << "\n"
       << source_name(c) << ".mean_weight=" << fixed(st.mean_weight) << "\n"
       << source_name(c) << ".mean_select_score=" << fixed(st.mean_select_score) << "\n"
       << source_name(c) << ".weight_histogram=";
    for (std::size_t b = 0; b < st.weight_histogram.size(); ++b) {
      os << (b ? "," : "") << st.weight_histogram[b];
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace posaug
