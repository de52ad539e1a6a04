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

#include "posaug/augmentation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace posaug {
namespace {

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::vector<PositiveCandidate> from_hits(UserIndex user, const std::vector<Hit>& hits,
                                         CandidateSource source) {
  std::vector<PositiveCandidate> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) out.push_back({user, h.row, h.score, h.score, source});
  return out;
}

// Draws x ~ Beta(alpha, alpha) as a ratio of gamma variates.
double draw_beta(double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double a = gamma(rng);
  const double b = gamma(rng);
  const double s = a + b;
  return s > 0.0 ? a / s : 0.5;
}

}  // namespace

const char* source_name(CandidateSource s) {
  switch (s) {
    case CandidateSource::kU2I: return "u2i";
    case CandidateSource::kI2I: return "i2i";
    case CandidateSource::kU2U2I: return "u2u2i";
  }
  return "?";
}

std::optional<CandidateSource> parse_source(std::string_view name) {
  for (CandidateSource s : kAllSources) {
    if (name == source_name(s)) return s;
  }
  return std::nullopt;
}

const char* sampler_name(SamplerKind s) {
  switch (s) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kImportance: return "importance";
    case SamplerKind::kBeta: return "beta";
  }
  return "?";
}

std::optional<SamplerKind> parse_sampler(std::string_view name) {
  for (SamplerKind s : {SamplerKind::kUniform, SamplerKind::kImportance, SamplerKind::kBeta}) {
    if (name == sampler_name(s)) return s;
  }
  return std::nullopt;
}

std::size_t AugmentedExample::total() const {
  std::size_t n = 0;
  for (const auto& a : aug) n += a.size();
  return n;
}

std::vector<PositiveCandidate> gen_u2i(UserIndex user, std::span<const double> user_repr,
                                       const EmbeddingIndex& items, std::size_t k,
                                       std::span<const ItemIndex> exclude) {
  if (is_zero(unit_query(user_repr))) return {};
  return from_hits(user, items.topk(user_repr, k, exclude), CandidateSource::kU2I);
}

std::vector<PositiveCandidate> gen_i2i(UserIndex user, std::span<const double> user_repr,
                                       std::span<const double> seed_item_repr,
                                       const EmbeddingIndex& items, std::size_t k,
                                       std::span<const ItemIndex> exclude) {
  const std::vector<double> u = unit_query(user_repr);
  if (is_zero(u) || is_zero(unit_query(seed_item_repr))) return {};
  auto out = from_hits(user, items.topk(seed_item_repr, k, exclude),
                       CandidateSource::kI2I);
  for (PositiveCandidate& c : out) c.user_score = items.score_unit(u, c.item);
  return out;
}

std::vector<PositiveCandidate> gen_u2u2i(
    UserIndex user, std::span<const double> user_repr, const EmbeddingIndex& users,
    std::size_t k_u, std::span<const std::vector<ItemIndex>> train_positives,
    const EmbeddingIndex& items, std::size_t k, std::span<const ItemIndex> exclude) {
  const std::vector<double> u = unit_query(user_repr);
  if (is_zero(u)) return {};
  std::vector<std::uint32_t> skip_users{user};
  for (std::size_t v = 0; v < train_positives.size(); ++v) {
    if (train_positives[v].empty()) skip_users.push_back(static_cast<std::uint32_t>(v));
  }
  const std::vector<Hit> neighbours = users.topk(user_repr, k_u, skip_users);

  std::vector<char> blocked(items.rows(), 0);
  for (ItemIndex e : exclude) {
    if (e < blocked.size()) blocked[e] = 1;
  }
  std::vector<char> pooled(items.rows(), 0);
  std::vector<Hit> pool;
  for (const Hit& n : neighbours) {
    for (ItemIndex it : train_positives[n.row]) {
      if (blocked[it] || pooled[it]) continue;
      pooled[it] = 1;
      pool.push_back({it, items.score_unit(u, it)});
    }
  }
  if (k < pool.size()) {
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k),
                      pool.end(), ranks_before);
    pool.resize(k);
  } else {
    std::sort(pool.begin(), pool.end(), ranks_before);
  }
  return from_hits(user, pool, CandidateSource::kU2U2I);
}

double rectified_score(double s) { return std::max(s, 0.0) + 1e-6; }

std::vector<PositiveCandidate> sample_candidates(std::span<const PositiveCandidate> cands,
                                                 std::size_t m, SamplerKind sampler,
                                                 double alpha, Rng& rng) {
  if (cands.size() <= m) return {cands.begin(), cands.end()};
  std::vector<PositiveCandidate> out;
  out.reserve(m);

  switch (sampler) {
    case SamplerKind::kUniform: {
      std::vector<std::size_t> idx(cands.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t j = 0; j < m; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, idx.size() - 1);
        std::swap(idx[j], idx[pick(rng)]);
        out.push_back(cands[idx[j]]);
      }
      break;
    }
    case SamplerKind::kImportance: {
      std::vector<double> w(cands.size());
      for (std::size_t i = 0; i < cands.size(); ++i) w[i] = rectified_score(cands[i].score);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        const double target = unit(rng) * total;
        double acc = 0.0;
        std::size_t chosen = cands.size();
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (w[i] == 0.0) continue;
          acc += w[i];
          chosen = i;
          if (target < acc) break;
        }
        out.push_back(cands[chosen]);
        w[chosen] = 0.0;
      }
      break;
    }
    case SamplerKind::kBeta: {
      const std::size_t n = cands.size();
      std::vector<char> taken(n, 0);
      std::size_t attempts = 0;
      while (out.size() < m && attempts < 16 * m) {
        ++attempts;
        const double x = draw_beta(alpha, rng);
        const std::size_t rank =
            std::min(static_cast<std::size_t>(x * static_cast<double>(n)), n - 1);
        if (taken[rank]) continue;
        taken[rank] = 1;
        out.push_back(cands[rank]);
      }
      if (out.size() < m) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
          if (!taken[i]) rest.push_back(i);
        }
        for (std::size_t j = 0; out.size() < m; ++j) {
          std::uniform_int_distribution<std::size_t> pick(j, rest.size() - 1);
          std::swap(rest[j], rest[pick(rng)]);
          out.push_back(cands[rest[j]]);
        }
      }
      break;
    }
  }
  return out;
}

std::vector<double> mixup_weights(std::span<const PositiveCandidate> sampled) {
  std::vector<double> w(sampled.size());
  double total = 0.0;
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    w[i] = rectified_score(sampled[i].user_score);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

Rng augment_rng(const AugmentConfig& cfg, std::size_t ordinal, CandidateSource source) {
  const std::uint64_t stream =
      (cfg.round << 2) | static_cast<std::uint64_t>(source);
  return derive_rng(cfg.seed, static_cast<std::uint64_t>(RngStream::kAugment) +
                                  (stream << 8),
                    ordinal);
}

AugmentContext make_augment_context(const Dataset& train, const HistoryMap& histories,
                                    const ModelParams& params) {
  AugmentContext ctx;
  const std::size_t nu = params.num_users();
  std::vector<UserIndex> users(nu);
  std::vector<std::span<const ItemIndex>> hists(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    users[u] = static_cast<UserIndex>(u);
    auto it = histories.find(static_cast<UserIndex>(u));
    if (it != histories.end()) hists[u] = it->second.items;
  }
  ctx.user_reprs = encode_users(params, users, hists);
  ctx.item_reprs = encode_all_items(params);
  ctx.user_index = EmbeddingIndex::build(ctx.user_reprs.view());
  ctx.item_index = EmbeddingIndex::build(ctx.item_reprs.view());
  ctx.train_positives = build_train_positives(train);
  ctx.train_positives.resize(nu);
  return ctx;
}

std::vector<AugmentedExample> build_augmented_trainset(const Dataset& train,
                                                       const AugmentContext& ctx,
                                                       const AugmentConfig& cfg) {
  const std::size_t nu = ctx.user_reprs.rows();
  const std::size_t ni = ctx.item_reprs.rows();
  const auto& pos = ctx.train_positives;
  const auto src = [](CandidateSource s) { return static_cast<std::size_t>(s); };
  const bool use_u2i = cfg.enabled[src(CandidateSource::kU2I)];
  const bool use_i2i = cfg.enabled[src(CandidateSource::kI2I)];
  const bool use_u2u2i = cfg.enabled[src(CandidateSource::kU2U2I)];

  // Per-user candidate lists.
  std::vector<std::vector<PositiveCandidate>> u2i(nu), u2u2i(nu);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t ui = 0; ui < static_cast<std::ptrdiff_t>(nu); ++ui) {
    const auto u = static_cast<std::size_t>(ui);
    if (pos[u].empty()) continue;
    const auto repr = ctx.user_reprs.row(u);
    const auto user = static_cast<UserIndex>(u);
    if (use_u2i) u2i[u] = gen_u2i(user, repr, ctx.item_index, cfg.k, pos[u]);
    if (use_u2u2i) {
      u2u2i[u] = gen_u2u2i(user, repr, ctx.user_index, cfg.k_u, pos, ctx.item_index,
                           cfg.k, pos[u]);
    }
  }

  // Per-seed-item neighbour lists, long enough that filtering any clicking
  // user's train items still leaves k entries.
  std::vector<std::size_t> fetch(ni, 0);
  if (use_i2i) {
    for (const Interaction& x : train.interactions) {
      fetch[x.item] = std::max(fetch[x.item], cfg.k + pos[x.user].size());
    }
  }
  std::vector<std::vector<Hit>> neighbours(ni);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(ni); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (fetch[i] == 0 || ctx.item_index.is_masked(i)) continue;
    neighbours[i] = ctx.item_index.topk(ctx.item_reprs.row(i), fetch[i]);
  }

  const std::size_t n = train.interactions.size();
  std::vector<AugmentedExample> out(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t oi = 0; oi < static_cast<std::ptrdiff_t>(n); ++oi) {
    const auto ordinal = static_cast<std::size_t>(oi);
    const Interaction& x = train.interactions[ordinal];
    AugmentedExample& ex = out[ordinal];
    ex.user = x.user;
    ex.pos_item = x.item;
    if (ctx.user_index.is_masked(x.user)) continue;
    const std::vector<ItemIndex>& seen = pos[x.user];

    std::vector<PositiveCandidate> i2i;
    if (use_i2i) {
      const std::vector<double> u = unit_query(ctx.user_reprs.row(x.user));
      for (const Hit& h : neighbours[x.item]) {
        if (i2i.size() == cfg.k) break;
        if (h.row == x.item || std::binary_search(seen.begin(), seen.end(), h.row)) continue;
        i2i.push_back({x.user, h.row, h.score, ctx.item_index.score_unit(u, h.row),
                       CandidateSource::kI2I});
      }
    }

    const std::vector<PositiveCandidate>* lists[kNumSources] = {&u2i[x.user], &i2i,
                                                                &u2u2i[x.user]};
    for (CandidateSource s : kAllSources) {
      if (!cfg.enabled[src(s)]) continue;
      Rng rng = augment_rng(cfg, ordinal, s);
      const auto sampled = sample_candidates(*lists[src(s)], cfg.m, cfg.sampler,
                                             cfg.alpha, rng);
      const auto w = mixup_weights(sampled);
      auto& dst = ex.aug[src(s)];
      for (std::size_t j = 0; j < sampled.size(); ++j) {
        dst.push_back({sampled[j].item, w[j], sampled[j].score, sampled[j].user_score});
      }
    }
  }
  return out;
}

std::vector<AugmentedExample> build_augmented_trainset(const Dataset& train,
                                                       const HistoryMap& histories,
                                                       const ModelParams& params,
                                                       const AugmentConfig& cfg) {
  return build_augmented_trainset(train, make_augment_context(train, histories, params),
                                  cfg);
}

void write_augmentations_tsv(std::ostream& out, std::span<const AugmentedExample> set,
                             const Vocabulary& users, const Vocabulary& items) {
  out << "user\tpos_item\tsource\taug_item\tselect_score\tweight\n";
  char a[32], b[32];
  for (const AugmentedExample& ex : set) {
    for (CandidateSource s : kAllSources) {
      for (const AugItem& it : ex.aug[static_cast<std::size_t>(s)]) {
        std::snprintf(a, sizeof a, "%.17g", it.select_score);
        std::snprintf(b, sizeof b, "%.17g", it.weight);
        out << users.raw(ex.user) << '\t' << items.raw(ex.pos_item) << '\t'
            << source_name(s) << '\t' << items.raw(it.item) << '\t' << a << '\t' << b
            << '\n';
      }
    }
  }
}

std::vector<AugmentationRow> read_augmentations_tsv(std::istream& in) {
  std::vector<AugmentationRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("user\t", 0) == 0)) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 6) throw MalformedLine(line_no, "expected 6 columns");
    AugmentationRow r;
    r.user = f[0];
    r.pos_item = f[1];
    const auto s = parse_source(f[2]);
    if (!s) throw MalformedLine(line_no, "unknown source '" + f[2] + "'");
    r.source = *s;
    r.aug_item = f[3];
    try {
      std::size_t used = 0;
      r.select_score = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("trailing");
      r.weight = std::stod(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw MalformedLine(line_no, "bad numeric field");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace posaug
