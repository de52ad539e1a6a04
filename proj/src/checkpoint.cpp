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

#include "posaug/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "posaug/config.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace posaug {
namespace {

constexpr char kMagic[8] = {'P', 'O', 'S', 'A', 'U', 'G', 'C', 'K'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw CheckpointError("truncated checkpoint");
  }
  return v;
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw CheckpointError("truncated checkpoint");
  }
}

std::string get_string(std::istream& in, std::size_t len) {
  if (len > (1u << 20)) throw CheckpointError("implausible string length");
  std::string s(len, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
    throw CheckpointError("truncated checkpoint");
  }
  return s;
}

}  // namespace

void save_checkpoint(std::ostream& out, const ModelParams& params, const HyperParams& hp) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string hp_text = hyperparams_to_text(hp);
  put<std::uint64_t>(out, hp_text.size());
  out.write(hp_text.data(), static_cast<std::streamsize>(hp_text.size()));
  put<std::uint64_t>(out, params.num_users());
  put<std::uint64_t>(out, params.num_items());
  put<std::uint64_t>(out, params.dim());
  put<std::uint64_t>(out, params.hidden());
  put<std::uint32_t>(out, kNumTensors);
  for (int t = 0; t < kNumTensors; ++t) {
    const Tensor id = static_cast<Tensor>(t);
    const std::string name = tensor_name(id);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const ConstMatrixView v = params.tensor(id);
    put<std::uint64_t>(out, v.rows);
    put<std::uint64_t>(out, v.cols);
    put_doubles(out, v.data, v.size());
  }
  const AdamState& adam = params.adam();
  put<std::uint64_t>(out, adam.step);
  put_doubles(out, adam.m.data(), adam.m.size());
  put_doubles(out, adam.v.data(), adam.v.size());
  if (!out) throw CheckpointError("failed to write checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const HyperParams& hp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot create '" + path.string() + "'");
  save_checkpoint(out, params, hp);
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.hp = parse_hyperparams(get_string(in, get<std::uint64_t>(in)));
  const auto nu = get<std::uint64_t>(in);
  const auto ni = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  const auto hidden = get<std::uint64_t>(in);
  ck.params = ModelParams(nu, ni, dim, hidden);
  if (get<std::uint32_t>(in) != static_cast<std::uint32_t>(kNumTensors)) {
    throw CheckpointError("unexpected tensor count");
  }
  for (int t = 0; t < kNumTensors; ++t) {
    const Tensor id = static_cast<Tensor>(t);
    const std::string name = get_string(in, get<std::uint32_t>(in));
    if (name != tensor_name(id)) throw CheckpointError("unexpected tensor '" + name + "'");
    const MatrixView v = ck.params.tensor(id);
    if (get<std::uint64_t>(in) != v.rows || get<std::uint64_t>(in) != v.cols) {
      throw CheckpointError("shape mismatch for tensor '" + name + "'");
    }
    get_doubles(in, v.data, v.size());
  }
  AdamState& adam = ck.params.adam();
  adam.step = get<std::uint64_t>(in);
  get_doubles(in, adam.m.data(), adam.m.size());
  get_doubles(in, adam.v.data(), adam.v.size());
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace posaug
