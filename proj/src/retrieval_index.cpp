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

#include "posaug/retrieval_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "posaug/kernels.hpp"

namespace posaug {
namespace {

constexpr double kZeroNorm = 1e-12;
constexpr std::size_t kQueryBlock = 64;

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

}  // namespace

std::vector<double> unit_query(std::span<const double> q) {
  std::vector<double> out(q.size(), 0.0);
  const double norm = std::sqrt(dot(q.data(), q.data(), q.size()));
  if (norm < kZeroNorm) return out;
  for (std::size_t j = 0; j < q.size(); ++j) out[j] = q[j] / norm;
  return out;
}

EmbeddingIndex EmbeddingIndex::build(ConstMatrixView vectors) {
  if (vectors.rows == 0 || vectors.cols == 0) {
    throw DimensionMismatch("build_index: need at least one row and one column");
  }
  EmbeddingIndex index;
  index.unit_ = Matrix(vectors.rows, vectors.cols);
  index.masked_.assign(vectors.rows, 0);
  for (std::size_t r = 0; r < vectors.rows; ++r) {
    const std::vector<double> u =
        unit_query(std::span<const double>(vectors.row(r), vectors.cols));
    const bool zero = std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; });
    if (zero) {
      index.masked_[r] = 1;
      index.zero_rows_.push_back(static_cast<std::uint32_t>(r));
    }
    std::copy(u.begin(), u.end(), index.unit_.row(r).begin());
  }
  return index;
}

double EmbeddingIndex::score_unit(std::span<const double> query_unit,
                                  std::size_t row) const {
  if (masked_[row]) return 0.0;
  return dot(query_unit.data(), unit_.row(row).data(), dim());
}

void EmbeddingIndex::scores(std::span<const double> query, std::span<double> out) const {
  if (query.size() != dim() || out.size() != rows()) {
    throw DimensionMismatch("scores: dimension mismatch");
  }
  const std::vector<double> q = unit_query(query);
  for (std::size_t r = 0; r < rows(); ++r) out[r] = score_unit(q, r);
}

std::vector<Hit> select_topk(std::span<const double> scores, std::size_t k,
                             std::span<const char> excluded) {
  std::vector<Hit> hits;
  hits.reserve(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (!excluded.empty() && excluded[r]) continue;
    hits.push_back({static_cast<std::uint32_t>(r), scores[r]});
  }
  if (k < hits.size()) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k),
                      hits.end(), ranks_before);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), ranks_before);
  }
  return hits;
}

std::vector<Hit> EmbeddingIndex::topk(std::span<const double> query, std::size_t k,
                                      std::span<const std::uint32_t> exclude) const {
  std::vector<double> s(rows());
  scores(query, s);
  std::vector<char> mask;
  if (!exclude.empty()) {
    mask.assign(rows(), 0);
    for (std::uint32_t e : exclude) {
      if (e < rows()) mask[e] = 1;
    }
  }
  return select_topk(s, k, mask);
}

std::vector<std::vector<Hit>> EmbeddingIndex::topk_batch(
    ConstMatrixView queries, std::size_t k,
    std::span<const std::vector<std::uint32_t>> excludes, bool parallel) const {
  if (queries.cols != dim()) throw DimensionMismatch("topk_batch: dimension mismatch");
  if (!excludes.empty() && excludes.size() != queries.rows) {
    throw DimensionMismatch("topk_batch: one exclude set per query required");
  }
  std::vector<std::vector<Hit>> out(queries.rows);
  for (std::size_t start = 0; start < queries.rows; start += kQueryBlock) {
    const std::size_t count = std::min(kQueryBlock, queries.rows - start);
    Matrix block(count, dim());
    for (std::size_t q = 0; q < count; ++q) {
      const std::vector<double> u =
          unit_query(std::span<const double>(queries.row(start + q), dim()));
      std::copy(u.begin(), u.end(), block.row(q).begin());
    }
    Matrix s(count, rows());
    if (parallel) {
      kernels::dot_scores(block.view(), unit_.view(), s.view());
    } else {
      kernels::serial::dot_scores(block.view(), unit_.view(), s.view());
    }
    for (std::uint32_t r : zero_rows_) {
      for (std::size_t q = 0; q < count; ++q) s(q, r) = 0.0;
    }

    const auto rank_one = [&](std::size_t q) {
      std::vector<char> mask;
      if (!excludes.empty() && !excludes[start + q].empty()) {
        mask.assign(rows(), 0);
        for (std::uint32_t e : excludes[start + q]) {
          if (e < rows()) mask[e] = 1;
        }
      }
      out[start + q] = select_topk(s.row(q), k, mask);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
      for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(count); ++q) {
        rank_one(static_cast<std::size_t>(q));
      }
    } else {
      for (std::size_t q = 0; q < count; ++q) rank_one(q);
    }
  }
  return out;
}

void write_topk_tsv(std::ostream& out, std::span<const std::string> query_ids,
                    std::span<const std::vector<Hit>> lists,
                    std::span<const std::string> row_ids) {
  char buf[64];
  for (std::size_t q = 0; q < lists.size(); ++q) {
    for (std::size_t r = 0; r < lists[q].size(); ++r) {
      const Hit& h = lists[q][r];
      std::snprintf(buf, sizeof buf, "%.17g", h.score);
      out << query_ids[q] << '\t' << (r + 1) << '\t'
          << (row_ids.empty() ? std::to_string(h.row) : row_ids[h.row]) << '\t'
          << buf << '\n';
    }
  }
}

}  // namespace posaug
