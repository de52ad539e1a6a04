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

#ifndef POSAUG_CONFIG_HPP_
#define POSAUG_CONFIG_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "posaug/distill.hpp"
#include "posaug/evaluation.hpp"
#include "posaug/model.hpp"

namespace posaug {

// Flat key=value run configuration. Every key can also be given on the
// command line as --key value.
struct RunConfig {
  std::string dataset;
  std::string output_dir = "out";
  double test_fraction = 0.2;
  PipelineConfig pipeline;
  EvalConfig eval;
  std::size_t num_seeds = 1;
  int threads = 0;  // 0: POSAUG_THREADS or the OpenMP default
  bool dump_ranks = false;
  std::size_t dump_topk = 0;  // depth of the per-user top-k dump; 0 = off

  const HyperParams& hp() const { return pipeline.hp; }
  HyperParams& hp() { return pipeline.hp; }
  void validate() const;
};

// All accepted keys in echo order.
const std::vector<std::string>& config_keys();

// Throws ConfigError for an unknown key or an unparsable value.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
// Returns false when `key` is not a hyper-parameter key.
bool set_hyperparam(HyperParams& hp, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

// Lines are "key = value"; '#' starts a comment. Errors carry
// "<source>:<line>:".
RunConfig parse_config(std::istream& in, const std::string& source_name,
                       RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

// Every key, one per line; parse_config(config_to_text(c)) == c.
std::string config_to_text(const RunConfig& cfg);
std::string hyperparams_to_text(const HyperParams& hp);
HyperParams parse_hyperparams(std::string_view text);

// %.17g
std::string format_double(double x);

}  // namespace posaug

#endif  // POSAUG_CONFIG_HPP_
