// dsu/units.hpp

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
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"
#include "dsu/rng.hpp"

namespace dsu {

/// Processing stage of a unit sequence. Transitions only move forward:
/// raw -> dedup -> bpe.
enum class Stage { kRaw, kDedup, kBpe };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kRaw: return "raw";
    case Stage::kDedup: return "dedup";
    case Stage::kBpe: return "bpe";
  }
  return "?";
}

/// One discretized utterance. vocab_size counts the base unit alphabet
/// {0..vocab_size-1}; the value vocab_size itself is reserved for the mask
/// symbol, so after masking a unit may equal vocab_size.
struct UnitSequence {
  std::vector<std::uint32_t> units;
  std::uint32_t vocab_size = 0;
  Stage stage = Stage::kRaw;
  std::string source_id;
};

using UnitCorpus = std::vector<UnitSequence>;

/// Collapses every maximal run of equal consecutive units to a single
/// occurrence. Input must be a raw sequence; the result is stage dedup.
inline UnitSequence deduplicate(const UnitSequence& s) {
  if (s.stage != Stage::kRaw)
    throw StageError(std::string("deduplicate expects a raw sequence, got ") +
                     stage_name(s.stage));
  UnitSequence out;
  out.vocab_size = s.vocab_size;
  out.stage = Stage::kDedup;
  out.source_id = s.source_id;
  out.units.reserve(s.units.size());
  for (std::uint32_t u : s.units) {
    if (out.units.empty() || out.units.back() != u) out.units.push_back(u);
  }
  return out;
}

/// Overwrites n_masks random spans with the reserved mask symbol
/// (ID = vocab_size). Per span, width ~ uniform{1..max_width} then
/// start ~ uniform{0..len-width}; a span wider than the sequence is
/// skipped without drawing a start. Length and stage are unchanged.
/// Draws replay exactly on any splitmix64-compatible implementation.
inline UnitSequence time_mask(const UnitSequence& s, std::size_t n_masks,
                              std::size_t max_width, std::uint64_t seed) {
  if (s.stage == Stage::kBpe)
    throw StageError("time_mask expects a raw or dedup sequence, got bpe");
  if (n_masks > 0 && max_width == 0)
    throw ValueError("max_width must be at least 1 when n_masks > 0");
  UnitSequence out = s;
  const std::uint32_t mask_id = s.vocab_size;
  SplitMix64 rng(seed);
  for (std::size_t m = 0; m < n_masks; ++m) {
    std::uint64_t width = 1 + rng.uniform(max_width);
    if (width > out.units.size()) continue;
    std::uint64_t start = rng.uniform(out.units.size() - width + 1);
    for (std::uint64_t i = start; i < start + width; ++i)
      out.units[i] = mask_id;
  }
  return out;
}

/// Renders "one sequence per line": optional "source_id<TAB>" prefix, then
/// space-separated decimal unit IDs.
inline std::string format_units(const UnitCorpus& corpus) {
  std::string out;
  for (const UnitSequence& s : corpus) {
    if (!s.source_id.empty()) {
      out += s.source_id;
      out += '\t';
    }
    for (std::size_t i = 0; i < s.units.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(s.units[i]);
    }
    out += '\n';
  }
  return out;
}

/// Parses the unit text format. When vocab_size is given, every unit must
/// be <= vocab_size (equality is the reserved mask symbol); when absent,
/// the corpus vocabulary becomes max unit + 1. Each line may start with a
/// "source_id<TAB>" prefix; an empty line is an empty sequence.
inline UnitCorpus parse_units(const std::string& text, Stage stage,
                              std::optional<std::uint32_t> vocab_size = {}) {
  UnitCorpus corpus;
  std::uint64_t max_unit = 0;
  bool any_unit = false;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    UnitSequence s;
    s.stage = stage;
    std::size_t tab = line.find('\t');
    std::string body;
    if (tab != std::string::npos) {
      s.source_id = line.substr(0, tab);
      body = line.substr(tab + 1);
    } else {
      body = line;
    }
    std::istringstream fields(body);
    std::string tok;
    while (fields >> tok) {
      std::uint64_t v = 0;
      std::size_t used = 0;
      try {
        v = std::stoull(tok, &used);
      } catch (const std::exception&) {
        throw CorruptError("line " + std::to_string(line_no) +
                           ": bad unit ID '" + tok + "'");
      }
      if (used != tok.size() || tok[0] == '-' ||
          v > std::numeric_limits<std::uint32_t>::max())
        throw CorruptError("line " + std::to_string(line_no) +
                           ": bad unit ID '" + tok + "'");
      if (vocab_size && v > *vocab_size)
        throw ValueError("line " + std::to_string(line_no) + ": unit " +
                         std::to_string(v) + " exceeds vocabulary " +
                         std::to_string(*vocab_size));
      s.units.push_back(static_cast<std::uint32_t>(v));
      if (!any_unit || v > max_unit) max_unit = v;
      any_unit = true;
    }
    corpus.push_back(std::move(s));
  }
  std::uint32_t vocab =
      vocab_size ? *vocab_size
                 : (any_unit ? static_cast<std::uint32_t>(max_unit + 1) : 0);
  for (UnitSequence& s : corpus) s.vocab_size = vocab;
  return corpus;
}

inline UnitCorpus load_unit_corpus(const std::filesystem::path& path,
                                   Stage stage,
                                   std::optional<std::uint32_t> vocab = {}) {
  return parse_units(detail::read_file(path), stage, vocab);
}

inline void save_unit_corpus(const std::filesystem::path& path,
                             const UnitCorpus& corpus) {
  detail::write_file(path, format_units(corpus));
}

}  // namespace dsu
