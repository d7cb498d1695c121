// dsu/config.hpp

// Copyright 2026  The DSU Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>

#include "dsu/analysis.hpp"
#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"
#include "dsu/fbank.hpp"
#include "dsu/kmeans.hpp"

namespace dsu {

/// Everything the end-to-end pipeline needs, parsed from a plain-text
/// key=value manifest. Unknown and duplicate keys are rejected so a config
/// file is an exact record of a run; relative paths are resolved against
/// the config file's directory.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::filesystem::path wav_list;       // set iff input.wav_list given
  std::filesystem::path features_list;  // set iff input.features_list given
  std::filesystem::path out_dir;
  std::filesystem::path targets;  // optional CTC target corpus
  FbankConfig fbank;
  KmeansConfig kmeans;
  std::size_t mask_n_masks = 0;
  std::size_t mask_max_width = 0;
  std::uint32_t bpe_target_vocab = 0;
  SubsampleKind subsample = SubsampleKind::kConv1d2;

  // Which keys the file actually set; lets single-step commands reuse a
  // partial manifest while the pipeline insists on the full one.
  bool has_wav_list = false;
  bool has_features_list = false;
  bool has_out_dir = false;
  bool has_kmeans_k = false;
  bool has_bpe_target = false;
  bool has_targets = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t cfg_u64(const std::string& key, const std::string& val) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(val, &used);
    if (used != val.size() || val[0] == '-') throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + val + "'");
  }
}

inline double cfg_real(const std::string& key, const std::string& val) {
  try {
    std::size_t used = 0;
    double v = std::stod(val, &used);
    if (used != val.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + val + "'");
  }
}

}  // namespace detail

/// Parses a pipeline manifest. Lines are "key=value"; blank lines and
/// full-line # comments are skipped. dir anchors any relative path value.
inline PipelineConfig parse_pipeline_config(
    const std::string& text, const std::filesystem::path& dir) {
  PipelineConfig cfg;
  std::set<std::string> seen;

  auto resolve = [&dir](const std::string& val) {
    std::filesystem::path p(val);
    return p.is_absolute() ? p : dir / p;
  };

  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key=value, got '" + t + "'");
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError("duplicate key: " + key);

    if (key == "seed") {
      cfg.seed = detail::cfg_u64(key, val);
    } else if (key == "workers") {
      cfg.workers = static_cast<std::size_t>(detail::cfg_u64(key, val));
      if (cfg.workers == 0) throw ConfigError("workers must be at least 1");
    } else if (key == "input.wav_list") {
      cfg.wav_list = resolve(val);
      cfg.has_wav_list = true;
    } else if (key == "input.features_list") {
      cfg.features_list = resolve(val);
      cfg.has_features_list = true;
    } else if (key == "out.dir") {
      cfg.out_dir = resolve(val);
      cfg.has_out_dir = true;
    } else if (key == "targets") {
      cfg.targets = resolve(val);
      cfg.has_targets = true;
    } else if (key == "fbank.sample_rate") {
      cfg.fbank.sample_rate =
          static_cast<std::uint32_t>(detail::cfg_u64(key, val));
    } else if (key == "fbank.frame_length_ms") {
      cfg.fbank.frame_length_ms = detail::cfg_real(key, val);
    } else if (key == "fbank.frame_shift_ms") {
      cfg.fbank.frame_shift_ms = detail::cfg_real(key, val);
    } else if (key == "fbank.n_fft") {
      cfg.fbank.n_fft = static_cast<std::size_t>(detail::cfg_u64(key, val));
    } else if (key == "fbank.n_mels") {
      cfg.fbank.n_mels = static_cast<std::size_t>(detail::cfg_u64(key, val));
    } else if (key == "fbank.f_min") {
      cfg.fbank.f_min = detail::cfg_real(key, val);
    } else if (key == "fbank.f_max") {
      cfg.fbank.f_max = detail::cfg_real(key, val);
    } else if (key == "fbank.log_floor") {
      cfg.fbank.log_floor = detail::cfg_real(key, val);
    } else if (key == "kmeans.k") {
      cfg.kmeans.k = static_cast<std::uint32_t>(detail::cfg_u64(key, val));
      cfg.has_kmeans_k = true;
    } else if (key == "kmeans.max_iters") {
      cfg.kmeans.max_iters =
          static_cast<std::size_t>(detail::cfg_u64(key, val));
    } else if (key == "kmeans.tol") {
      cfg.kmeans.tol = detail::cfg_real(key, val);
    } else if (key == "kmeans.init") {
      if (val == "kmeans++") cfg.kmeans.init = KmeansInit::kPlusPlus;
      else if (val == "random") cfg.kmeans.init = KmeansInit::kRandom;
      else throw ConfigError("kmeans.init must be kmeans++ or random, got '" +
                             val + "'");
    } else if (key == "kmeans.batch_size") {
      cfg.kmeans.batch_size =
          val == "full" ? 0
                        : static_cast<std::size_t>(detail::cfg_u64(key, val));
    } else if (key == "mask.n_masks") {
      cfg.mask_n_masks = static_cast<std::size_t>(detail::cfg_u64(key, val));
    } else if (key == "mask.max_width") {
      cfg.mask_max_width =
          static_cast<std::size_t>(detail::cfg_u64(key, val));
    } else if (key == "bpe.target_vocab") {
      cfg.bpe_target_vocab =
          static_cast<std::uint32_t>(detail::cfg_u64(key, val));
      cfg.has_bpe_target = true;
    } else if (key == "subsample.kind") {
      cfg.subsample = parse_subsample_kind(val);
    } else {
      throw ConfigError("unknown key: " + key);
    }
  }

  if (cfg.mask_n_masks > 0 && cfg.mask_max_width == 0)
    throw ConfigError("mask.max_width must be at least 1 when masking");
  return cfg;
}

/// End-to-end runs need the full manifest; single-step commands may use a
/// partial one.
inline void require_pipeline_keys(const PipelineConfig& cfg) {
  if (!cfg.has_out_dir) throw ConfigError("missing required key out.dir");
  if (!cfg.has_kmeans_k) throw ConfigError("missing required key kmeans.k");
  if (!cfg.has_bpe_target)
    throw ConfigError("missing required key bpe.target_vocab");
  if (cfg.has_wav_list == cfg.has_features_list)
    throw ConfigError(
        "exactly one of input.wav_list and input.features_list is required");
}

inline PipelineConfig load_pipeline_config(
    const std::filesystem::path& path) {
  return parse_pipeline_config(detail::read_file(path),
                               path.parent_path());
}

}  // namespace dsu
