// dsu/bpe.hpp

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
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"
#include "dsu/units.hpp"

namespace dsu {

/// One learned merge: adjacent (left, right) becomes the metatoken result.
struct BpeMerge {
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t result = 0;
};

/// Byte-pair-encoding model over an integer alphabet. Metatoken IDs are
/// assigned consecutively: merge i creates base_vocab + i.
struct BpeModel {
  std::uint32_t base_vocab = 0;
  std::uint32_t target_vocab = 0;
  std::vector<BpeMerge> merges;

  std::uint32_t vocab_size() const {
    return base_vocab + static_cast<std::uint32_t>(merges.size());
  }
};

namespace detail {

struct PairHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p)
      const noexcept {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(p.first) << 32) | p.second);
  }
};

/// Replaces every adjacent (left, right) occurrence left-to-right without
/// overlap: [3,3,3] with (3,3) yields [new, 3].
inline void replace_pair(std::vector<std::uint32_t>& seq, std::uint32_t left,
                         std::uint32_t right, std::uint32_t result) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < seq.size();) {
    if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
      seq[w++] = result;
      i += 2;
    } else {
      seq[w++] = seq[i++];
    }
  }
  seq.resize(w);
}

inline bool contains_pair(const std::vector<std::uint32_t>& seq,
                          std::uint32_t left, std::uint32_t right) {
  for (std::size_t i = 0; i + 1 < seq.size(); ++i)
    if (seq[i] == left && seq[i + 1] == right) return true;
  return false;
}

}  // namespace detail

/// The training alphabet of a corpus: the shared vocab_size, plus one when
/// the reserved mask symbol (unit == vocab_size) actually occurs.
inline std::uint32_t bpe_base_vocab(const UnitCorpus& corpus) {
  if (corpus.empty()) throw ValueError("empty corpus");
  std::uint32_t vocab = corpus.front().vocab_size;
  bool mask_seen = false;
  for (const UnitSequence& s : corpus) {
    if (s.vocab_size != vocab)
      throw ValueError("corpus mixes vocabulary sizes " +
                       std::to_string(vocab) + " and " +
                       std::to_string(s.vocab_size));
    for (std::uint32_t u : s.units) {
      if (u == vocab) mask_seen = true;
      else if (u > vocab)
        throw ValueError("unit " + std::to_string(u) +
                         " exceeds vocabulary " + std::to_string(vocab));
    }
  }
  return vocab + (mask_seen ? 1 : 0);
}

/// Greedy pair-merge training on a de-duplicated corpus. Each round counts
/// every adjacent position (so [3,3,3] holds two (3,3) pairs), merges the
/// most frequent pair (ties: smaller left, then smaller right), and stops
/// when the vocabulary reaches target_vocab or no pair occurs twice.
/// Counts are maintained incrementally: a rewritten sequence retracts its
/// old pairs and contributes its new ones.
inline BpeModel bpe_train(const UnitCorpus& corpus,
                          std::uint32_t target_vocab) {
  if (corpus.empty()) throw ValueError("empty corpus");
  for (const UnitSequence& s : corpus) {
    if (s.stage != Stage::kDedup)
      throw StageError(
          std::string("bpe_train expects dedup sequences, got ") +
          stage_name(s.stage));
  }
  BpeModel model;
  model.base_vocab = bpe_base_vocab(corpus);
  model.target_vocab = target_vocab;
  if (target_vocab <= model.base_vocab)
    throw ConfigError("target_vocab " + std::to_string(target_vocab) +
                      " must exceed the base vocabulary " +
                      std::to_string(model.base_vocab));

  std::vector<std::vector<std::uint32_t>> work;
  work.reserve(corpus.size());
  for (const UnitSequence& s : corpus) work.push_back(s.units);

  using Pair = std::pair<std::uint32_t, std::uint32_t>;
  std::unordered_map<Pair, std::uint64_t, detail::PairHash> counts;
  for (const auto& seq : work)
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      ++counts[{seq[i], seq[i + 1]}];

  while (model.vocab_size() < target_vocab) {
    // Selection is a total order on (count, left, right), so hash-map
    // iteration order cannot affect the result.
    bool found = false;
    Pair best{};
    std::uint64_t best_count = 0;
    for (const auto& [p, c] : counts) {
      if (c < 2) continue;
      if (!found || c > best_count ||
          (c == best_count &&
           (p.first < best.first ||
            (p.first == best.first && p.second < best.second)))) {
        best = p;
        best_count = c;
        found = true;
      }
    }
    if (!found) break;

    const std::uint32_t new_id = model.vocab_size();
    model.merges.push_back({best.first, best.second, new_id});
    for (auto& seq : work) {
      if (!detail::contains_pair(seq, best.first, best.second)) continue;
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        auto it = counts.find({seq[i], seq[i + 1]});
        if (--it->second == 0) counts.erase(it);
      }
      detail::replace_pair(seq, best.first, best.second, new_id);
      for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        ++counts[{seq[i], seq[i + 1]}];
    }
  }
  return model;
}

/// Applies the trained merges, in order, to one de-duplicated sequence.
inline UnitSequence bpe_encode(const BpeModel& model, const UnitSequence& s) {
  if (s.stage != Stage::kDedup)
    throw StageError(std::string("bpe_encode expects a dedup sequence, got ") +
                     stage_name(s.stage));
  for (std::uint32_t u : s.units)
    if (u >= model.base_vocab)
      throw ValueError("unit " + std::to_string(u) +
                       " is outside the model's base vocabulary " +
                       std::to_string(model.base_vocab));
  UnitSequence out;
  out.units = s.units;
  out.vocab_size = model.vocab_size();
  out.stage = Stage::kBpe;
  out.source_id = s.source_id;
  for (const BpeMerge& m : model.merges)
    detail::replace_pair(out.units, m.left, m.right, m.result);
  return out;
}

/// Expands metatokens back to base units; exact inverse of bpe_encode.
inline UnitSequence bpe_decode(const BpeModel& model, const UnitSequence& s) {
  const std::uint32_t limit = model.vocab_size();
  UnitSequence out;
  out.vocab_size = model.base_vocab;
  out.stage = Stage::kDedup;
  out.source_id = s.source_id;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t u : s.units) {
    if (u >= limit)
      throw ValueError("unit " + std::to_string(u) +
                       " is outside the model's vocabulary " +
                       std::to_string(limit));
    stack.push_back(u);
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      stack.pop_back();
      if (v < model.base_vocab) {
        out.units.push_back(v);
      } else {
        const BpeMerge& m = model.merges[v - model.base_vocab];
        stack.push_back(m.right);
        stack.push_back(m.left);
      }
    }
  }
  return out;
}

/// Model file: line 1 "base_vocab N target_vocab M", then one merge per
/// line "left right new".
inline std::string format_bpe_model(const BpeModel& model) {
  std::string out = "base_vocab " + std::to_string(model.base_vocab) +
                    " target_vocab " + std::to_string(model.target_vocab) +
                    "\n";
  for (const BpeMerge& m : model.merges)
    out += std::to_string(m.left) + " " + std::to_string(m.right) + " " +
           std::to_string(m.result) + "\n";
  return out;
}

inline BpeModel parse_bpe_model(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line))
    throw FormatError("empty model file");
  std::istringstream head(line);
  std::string k1, k2;
  BpeModel model;
  if (!(head >> k1 >> model.base_vocab >> k2 >> model.target_vocab) ||
      k1 != "base_vocab" || k2 != "target_vocab" || (head >> k1))
    throw FormatError("bad model header: '" + line + "'");
  std::size_t line_no = 1;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    BpeMerge m;
    std::string extra;
    if (!(fields >> m.left >> m.right >> m.result) || (fields >> extra))
      throw FormatError("bad merge on line " + std::to_string(line_no) +
                        ": '" + line + "'");
    if (m.result != model.vocab_size())
      throw CorruptError("merge on line " + std::to_string(line_no) +
                         " creates ID " + std::to_string(m.result) +
                         ", expected " + std::to_string(model.vocab_size()));
    if (m.left >= m.result || m.right >= m.result)
      throw CorruptError("merge on line " + std::to_string(line_no) +
                         " references IDs not yet defined");
    model.merges.push_back(m);
  }
  return model;
}

inline void save_bpe_model(const std::filesystem::path& path,
                           const BpeModel& model) {
  detail::write_file(path, format_bpe_model(model));
}

inline BpeModel load_bpe_model(const std::filesystem::path& path) {
  return parse_bpe_model(detail::read_file(path));
}

}  // namespace dsu
