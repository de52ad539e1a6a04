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

#include "posaug/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace posaug {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            const char* expected) {
  throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key) +
                    " (expected " + expected + ")");
}

std::size_t to_count(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, v, "a real number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true/false");
}

std::vector<std::size_t> to_counts(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto piece = trim(v.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
    out.push_back(to_count(key, piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

std::array<bool, kNumSources> to_sources(std::string_view key, std::string_view v) {
  std::array<bool, kNumSources> out{};
  if (trim(v) == "none") return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    const auto name = trim(v.substr(start, comma == std::string_view::npos
                                               ? std::string_view::npos
                                               : comma - start));
    const auto s = parse_source(name);
    if (!s) bad_value(key, v, "a comma list of u2i,i2i,u2u2i or 'none'");
    out[static_cast<std::size_t>(*s)] = true;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string sources_text(const std::array<bool, kNumSources>& src) {
  std::string s;
  for (CandidateSource c : kAllSources) {
    if (!src[static_cast<std::size_t>(c)]) continue;
    if (!s.empty()) s += ',';
    s += source_name(c);
  }
  return s.empty() ? "none" : s;
}

const std::vector<std::string> kHyperKeys = {
    "dim", "hidden", "negatives", "lr", "batch_size", "epochs", "k", "k_u", "m",
    "alpha", "beta_mix", "max_history", "seed", "adam_beta1", "adam_beta2", "adam_eps"};

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {"dataset", "output_dir", "test_fraction"};
    k.insert(k.end(), kHyperKeys.begin(), kHyperKeys.end());
    for (const char* s : {"phase2_epochs", "mixup_mode", "sampler", "refresh_every",
                          "phase2_init", "sources", "eval_k", "diversity_depths",
                          "exclude_train", "num_seeds", "threads", "dump_ranks",
                          "dump_topk"}) {
      k.emplace_back(s);
    }
    return k;
  }();
  return keys;
}

bool set_hyperparam(HyperParams& hp, std::string_view key, std::string_view v) {
  if (key == "dim") hp.dim = to_count(key, v);
  else if (key == "hidden") hp.hidden = to_count(key, v);
  else if (key == "negatives") hp.negatives = to_count(key, v);
  else if (key == "lr") hp.lr = to_real(key, v);
  else if (key == "batch_size") hp.batch_size = to_count(key, v);
  else if (key == "epochs") hp.epochs = to_count(key, v);
  else if (key == "k") hp.k = to_count(key, v);
  else if (key == "k_u") hp.k_u = to_count(key, v);
  else if (key == "m") hp.m = to_count(key, v);
  else if (key == "alpha") hp.alpha = to_real(key, v);
  else if (key == "beta_mix") hp.beta_mix = to_real(key, v);
  else if (key == "max_history") hp.max_history = to_count(key, v);
  else if (key == "seed") hp.seed = to_count(key, v);
  else if (key == "adam_beta1") hp.adam_beta1 = to_real(key, v);
  else if (key == "adam_beta2") hp.adam_beta2 = to_real(key, v);
  else if (key == "adam_eps") hp.adam_eps = to_real(key, v);
  else return false;
  return true;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  if (set_hyperparam(cfg.hp(), key, v)) return;
  PipelineConfig& p = cfg.pipeline;
  if (key == "dataset") {
    cfg.dataset = std::string(v);
  } else if (key == "output_dir") {
    cfg.output_dir = std::string(v);
  } else if (key == "test_fraction") {
    cfg.test_fraction = to_real(key, v);
  } else if (key == "phase2_epochs") {
    p.phase2_epochs = to_count(key, v);
  } else if (key == "mixup_mode") {
    const auto m = parse_mixup_mode(v);
    if (!m) bad_value(key, v, "output_space|representation_space");
    p.mixup_mode = *m;
  } else if (key == "sampler") {
    const auto s = parse_sampler(v);
    if (!s) bad_value(key, v, "uniform|importance|beta");
    p.sampler = *s;
  } else if (key == "refresh_every") {
    p.refresh_every = to_count(key, v);
  } else if (key == "phase2_init") {
    const auto i = parse_phase2_init(v);
    if (!i) bad_value(key, v, "from_phase1|fresh");
    p.phase2_init = *i;
  } else if (key == "sources") {
    p.sources = to_sources(key, v);
  } else if (key == "eval_k") {
    cfg.eval.ks = to_counts(key, v);
  } else if (key == "diversity_depths") {
    cfg.eval.diversity_depths = to_counts(key, v);
  } else if (key == "exclude_train") {
    cfg.eval.exclude_train = to_bool(key, v);
  } else if (key == "num_seeds") {
    cfg.num_seeds = to_count(key, v);
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(to_count(key, v));
  } else if (key == "dump_ranks") {
    cfg.dump_ranks = to_bool(key, v);
  } else if (key == "dump_topk") {
    cfg.dump_topk = to_count(key, v);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  const HyperParams& hp = cfg.hp();
  const PipelineConfig& p = cfg.pipeline;
  if (key == "dataset") return cfg.dataset;
  if (key == "output_dir") return cfg.output_dir;
  if (key == "test_fraction") return format_double(cfg.test_fraction);
  if (key == "dim") return std::to_string(hp.dim);
  if (key == "hidden") return std::to_string(hp.hidden);
  if (key == "negatives") return std::to_string(hp.negatives);
  if (key == "lr") return format_double(hp.lr);
  if (key == "batch_size") return std::to_string(hp.batch_size);
  if (key == "epochs") return std::to_string(hp.epochs);
  if (key == "k") return std::to_string(hp.k);
  if (key == "k_u") return std::to_string(hp.k_u);
  if (key == "m") return std::to_string(hp.m);
  if (key == "alpha") return format_double(hp.alpha);
  if (key == "beta_mix") return format_double(hp.beta_mix);
  if (key == "max_history") return std::to_string(hp.max_history);
  if (key == "seed") return std::to_string(hp.seed);
  if (key == "adam_beta1") return format_double(hp.adam_beta1);
  if (key == "adam_beta2") return format_double(hp.adam_beta2);
  if (key == "adam_eps") return format_double(hp.adam_eps);
  if (key == "phase2_epochs") return std::to_string(p.phase2_epochs);
  if (key == "mixup_mode") return mixup_mode_name(p.mixup_mode);
  if (key == "sampler") return sampler_name(p.sampler);
  if (key == "refresh_every") return std::to_string(p.refresh_every);
  if (key == "phase2_init") return phase2_init_name(p.phase2_init);
  if (key == "sources") return sources_text(p.sources);
  if (key == "eval_k") return join(cfg.eval.ks);
  if (key == "diversity_depths") return join(cfg.eval.diversity_depths);
  if (key == "exclude_train") return cfg.eval.exclude_train ? "true" : "false";
  if (key == "num_seeds") return std::to_string(cfg.num_seeds);
  if (key == "threads") return std::to_string(cfg.threads);
  if (key == "dump_ranks") return cfg.dump_ranks ? "true" : "false";
  if (key == "dump_topk") return std::to_string(cfg.dump_topk);
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void RunConfig::validate() const {
  hp().validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0,1)");
  }
  if (eval.ks.empty() || std::count(eval.ks.begin(), eval.ks.end(), 0u)) {
    throw ConfigError("eval_k needs positive values");
  }
  if (std::count(eval.diversity_depths.begin(), eval.diversity_depths.end(), 0u)) {
    throw ConfigError("diversity_depths need positive values");
  }
  if (num_seeds == 0) throw ConfigError("num_seeds must be >= 1");
}

RunConfig parse_config(std::istream& in, const std::string& source_name, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const auto where = source_name + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    try {
      set_config_value(base, trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in, path.string());
}

std::string config_to_text(const RunConfig& cfg) {
  std::string out;
  for (const std::string& key : config_keys()) {
    out += key + " = " + get_config_value(cfg, key) + "\n";
  }
  return out;
}

std::string hyperparams_to_text(const HyperParams& hp) {
  RunConfig c;
  c.hp() = hp;
  std::string out;
  for (const std::string& key : kHyperKeys) {
    out += key + " = " + get_config_value(c, key) + "\n";
  }
  return out;
}

HyperParams parse_hyperparams(std::string_view text) {
  HyperParams hp;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = trim(line);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos ||
        !set_hyperparam(hp, trim(s.substr(0, eq)), trim(s.substr(eq + 1)))) {
      throw ConfigError("hyper-parameter block line " + std::to_string(line_no) +
                        ": unrecognized entry");
    }
  }
  return hp;
}

}  // namespace posaug
