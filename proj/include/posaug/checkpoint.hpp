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

#ifndef POSAUG_CHECKPOINT_HPP_
#define POSAUG_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>

#include "posaug/model.hpp"

namespace posaug {

// Binary layout (little endian):
//   "POSAUGCK" | u32 version | u64 len + hyper-parameter text (key = value)
//   | u64 num_users, num_items, dim, hidden | u32 tensor count
//   | per tensor: u32 name len, name, u64 rows, u64 cols, rows*cols f64
//   | u64 adam step | adam m (f64 x total) | adam v (f64 x total)
// Values are stored bit for bit, so load(save(p)) == p.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  HyperParams hp;
  ModelParams params;
};

void save_checkpoint(std::ostream& out, const ModelParams& params, const HyperParams& hp);
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const HyperParams& hp);
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace posaug

#endif  // POSAUG_CHECKPOINT_HPP_
