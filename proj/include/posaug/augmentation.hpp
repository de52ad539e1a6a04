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

#ifndef POSAUG_AUGMENTATION_HPP_
#define POSAUG_AUGMENTATION_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posaug/common.hpp"
#include "posaug/data.hpp"
#include "posaug/model.hpp"
#include "posaug/retrieval_index.hpp"

namespace posaug {

enum class CandidateSource : std::uint8_t { kU2I = 0, kI2I = 1, kU2U2I = 2 };
inline constexpr std::size_t kNumSources = 3;
inline constexpr std::array<CandidateSource, kNumSources> kAllSources = {
    CandidateSource::kU2I, CandidateSource::kI2I, CandidateSource::kU2U2I};

const char* source_name(CandidateSource s);
std::optional<CandidateSource> parse_source(std::string_view name);

struct PositiveCandidate {
  UserIndex user = 0;
  ItemIndex item = 0;
  double score = 0.0;       // selection score: s(u,v), or s(v+,v) for i2i
  double user_score = 0.0;  // s(u,v), used for the mix-up weight
  CandidateSource source = CandidateSource::kU2I;

  bool operator==(const PositiveCandidate&) const = default;
};

struct AugItem {
  ItemIndex item = 0;
  double weight = 0.0;
  double select_score = 0.0;
  double user_score = 0.0;

  bool operator==(const AugItem&) const = default;
};

struct AugmentedExample {
  UserIndex user = 0;
  ItemIndex pos_item = 0;
  std::array<std::vector<AugItem>, kNumSources> aug;

  std::size_t total() const;
  bool operator==(const AugmentedExample&) const = default;
};

enum class SamplerKind { kUniform, kImportance, kBeta };
const char* sampler_name(SamplerKind s);
std::optional<SamplerKind> parse_sampler(std::string_view name);

// Candidate generators. `exclude` is the user's train items (the seed item
// included); excluded items never appear in the output.
std::vector<PositiveCandidate> gen_u2i(UserIndex user, std::span<const double> user_repr,
                                       const EmbeddingIndex& items, std::size_t k,
                                       std::span<const ItemIndex> exclude);

// Neighbours of the seed item; `score` is s(v+, v) and `user_score` is
// s(u, v).
std::vector<PositiveCandidate> gen_i2i(UserIndex user, std::span<const double> user_repr,
                                       std::span<const double> seed_item_repr,
                                       const EmbeddingIndex& items, std::size_t k,
                                       std::span<const ItemIndex> exclude);

// Pools the train positives of the k_u users closest to `user_repr` (the
// user itself and users without train positives are never neighbours),
// drops `exclude`, and keeps the k pooled items closest to the user.
std::vector<PositiveCandidate> gen_u2u2i(
    UserIndex user, std::span<const double> user_repr, const EmbeddingIndex& users,
    std::size_t k_u, std::span<const std::vector<ItemIndex>> train_positives,
    const EmbeddingIndex& items, std::size_t k, std::span<const ItemIndex> exclude);

// Draws up to m distinct candidates without replacement. Returns all of
// them (in input order) when there are at most m.
std::vector<PositiveCandidate> sample_candidates(std::span<const PositiveCandidate> cands,
                                                 std::size_t m, SamplerKind sampler,
                                                 double alpha, Rng& rng);

// max(s, 0) + 1e-6
double rectified_score(double s);

// Mix-up weights of one source: rectified user scores normalized to sum 1.
std::vector<double> mixup_weights(std::span<const PositiveCandidate> sampled);

struct AugmentConfig {
  std::size_t k = 50;
  std::size_t k_u = 10;
  std::size_t m = 3;
  double alpha = 0.5;
  SamplerKind sampler = SamplerKind::kUniform;
  std::array<bool, kNumSources> enabled = {true, true, true};
  std::uint64_t seed = 42;
  // Distinguishes augmentation rebuilds during refreshing.
  std::uint64_t round = 0;
};

// Generator for the sampling of one (interaction, source) pair.
Rng augment_rng(const AugmentConfig& cfg, std::size_t ordinal, CandidateSource source);

// Frozen representations and indices the generators query.
struct AugmentContext {
  Matrix user_reprs;  // num_users x d
  Matrix item_reprs;  // num_items x d
  EmbeddingIndex user_index;
  EmbeddingIndex item_index;
  std::vector<std::vector<ItemIndex>> train_positives;  // sorted per user
};

AugmentContext make_augment_context(const Dataset& train, const HistoryMap& histories,
                                    const ModelParams& params);

// One AugmentedExample per train interaction, in train order. Candidate
// lists that depend only on the user are computed once per user; the i2i
// neighbour lists once per seed item.
std::vector<AugmentedExample> build_augmented_trainset(const Dataset& train,
                                                       const AugmentContext& ctx,
                                                       const AugmentConfig& cfg);
std::vector<AugmentedExample> build_augmented_trainset(const Dataset& train,
                                                       const HistoryMap& histories,
                                                       const ModelParams& params,
                                                       const AugmentConfig& cfg);

// TSV with header: user, pos_item, source, aug_item, select_score, weight.
void write_augmentations_tsv(std::ostream& out, std::span<const AugmentedExample> set,
                             const Vocabulary& users, const Vocabulary& items);

struct AugmentationRow {
  std::string user;
  std::string pos_item;
  CandidateSource source = CandidateSource::kU2I;
  std::string aug_item;
  double select_score = 0.0;
  double weight = 0.0;
};

// Parses a dump written by write_augmentations_tsv. Throws MalformedLine.
std::vector<AugmentationRow> read_augmentations_tsv(std::istream& in);

}  // namespace posaug

#endif  // POSAUG_AUGMENTATION_HPP_
