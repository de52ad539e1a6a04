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

#ifndef POSAUG_RETRIEVAL_INDEX_HPP_
#define POSAUG_RETRIEVAL_INDEX_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "posaug/common.hpp"

namespace posaug {

struct Hit {
  std::uint32_t row = 0;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

// Total order used by every ranking in the library: higher score first,
// ties by ascending row.
inline bool ranks_before(const Hit& a, const Hit& b) {
  return a.score > b.score || (a.score == b.score && a.row < b.row);
}

// Scales q to unit length; all zeros when |q| < 1e-12.
std::vector<double> unit_query(std::span<const double> q);

// Immutable matrix of unit-normalized rows answering exact top-k cosine
// queries. Rows with norm below 1e-12 are masked and score 0 against
// everything.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  // Throws DimensionMismatch for an empty matrix or zero width.
  static EmbeddingIndex build(ConstMatrixView vectors);

  std::size_t rows() const { return unit_.rows(); }
  std::size_t dim() const { return unit_.cols(); }
  bool is_masked(std::size_t row) const { return masked_[row] != 0; }
  const std::vector<std::uint32_t>& zero_mask() const { return zero_rows_; }
  std::span<const double> unit_row(std::size_t row) const { return unit_.row(row); }
  const Matrix& unit_rows() const { return unit_; }

  // Cosine between a unit (or zero) query and one row.
  double score_unit(std::span<const double> query_unit, std::size_t row) const;
  // Cosine of the query against every row.
  void scores(std::span<const double> query, std::span<double> out) const;

  // The min(k, rows - |exclude|) best non-excluded rows, ranked by
  // ranks_before. Exclusions outside [0, rows) are ignored.
  std::vector<Hit> topk(std::span<const double> query, std::size_t k,
                        std::span<const std::uint32_t> exclude = {}) const;

  // topk for every query row; excludes is either empty or one set per query.
  // Queries are scored in blocks and ranked in parallel unless `parallel`
  // is false; both paths return identical lists.
  std::vector<std::vector<Hit>> topk_batch(
      ConstMatrixView queries, std::size_t k,
      std::span<const std::vector<std::uint32_t>> excludes = {},
      bool parallel = true) const;

 private:
  Matrix unit_;
  std::vector<char> masked_;
  std::vector<std::uint32_t> zero_rows_;
};

// Picks the best k of scores[0..n) not flagged in `excluded` (may be empty).
std::vector<Hit> select_topk(std::span<const double> scores, std::size_t k,
                             std::span<const char> excluded);

// Writes "query_id\trank\trow\tscore" lines (rank is 1-based).
void write_topk_tsv(std::ostream& out, std::span<const std::string> query_ids,
                    std::span<const std::vector<Hit>> lists,
                    std::span<const std::string> row_ids = {});

}  // namespace posaug

#endif  // POSAUG_RETRIEVAL_INDEX_HPP_
