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

#ifndef POSAUG_COMMON_HPP_
#define POSAUG_COMMON_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace posaug {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

// Every stateful random draw in the library goes through this engine.
using Rng = std::mt19937_64;

// Derives an independent generator for (seed, stream, ordinal). Used so that
// per-interaction work gives the same draws whether run serially or in
// parallel, and so that disabling one stream leaves the others untouched.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t ordinal);

// Stream tags for derive_rng.
enum class RngStream : std::uint64_t {
  kInit = 1,
  kPhase1 = 2,
  kPhase2 = 3,
  kAugment = 4,
  kPhase2Init = 5,
};

inline Rng derive_rng(std::uint64_t seed, RngStream stream,
                      std::uint64_t ordinal = 0) {
  return derive_rng(seed, static_cast<std::uint64_t>(stream), ordinal);
}

// ---------------------------------------------------------------------------
// Errors. Each failure class named by the contracts has its own type so the
// CLI can map them to diagnostics.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_no, const std::string& why)
      : Error("malformed line " + std::to_string(line_no) + ": " + why),
        line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};
class InvalidFraction : public Error {
 public:
  using Error::Error;
};
class CorpusExhausted : public Error {
 public:
  using Error::Error;
};
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class EmptyEvaluation : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class CheckpointError : public Error {
 public:
  using Error::Error;
};
// A file that could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Row-major dense matrix of doubles plus lightweight views over it.

template <class T>
struct BasicMatrixView {
  T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  T* row(std::size_t r) const { return data + r * cols; }
  std::span<T> row_span(std::size_t r) const { return {row(r), cols}; }
  T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return rows * cols; }

  operator BasicMatrixView<const T>() const { return {data, rows, cols}; }
};

using MatrixView = BasicMatrixView<double>;
using ConstMatrixView = BasicMatrixView<const double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  const std::vector<double>& values() const { return data_; }
  std::vector<double>& values() { return data_; }

  MatrixView view() { return {data_.data(), rows_, cols_}; }
  ConstMatrixView view() const { return {data_.data(), rows_, cols_}; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace posaug

#endif  // POSAUG_COMMON_HPP_
