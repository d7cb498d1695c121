// dsu/analysis.hpp

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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "dsu/errors.hpp"
#include "dsu/units.hpp"

namespace dsu {

/// Front-end length models: a plain linear projection keeps the length;
/// conv1dN is a 1-D convolution with kernel 3, padding 1, stride N.
enum class SubsampleKind { kLinear, kConv1d1, kConv1d2, kConv1d3 };

inline const char* subsample_name(SubsampleKind k) {
  switch (k) {
    case SubsampleKind::kLinear: return "linear";
    case SubsampleKind::kConv1d1: return "conv1d1";
    case SubsampleKind::kConv1d2: return "conv1d2";
    case SubsampleKind::kConv1d3: return "conv1d3";
  }
  return "?";
}

inline SubsampleKind parse_subsample_kind(const std::string& name) {
  if (name == "linear") return SubsampleKind::kLinear;
  if (name == "conv1d1") return SubsampleKind::kConv1d1;
  if (name == "conv1d2") return SubsampleKind::kConv1d2;
  if (name == "conv1d3") return SubsampleKind::kConv1d3;
  throw ValueError("unknown subsampling kind: '" + name + "'");
}

inline std::size_t subsample_stride(SubsampleKind k) {
  switch (k) {
    case SubsampleKind::kLinear:
    case SubsampleKind::kConv1d1: return 1;
    case SubsampleKind::kConv1d2: return 2;
    case SubsampleKind::kConv1d3: return 3;
  }
  return 1;
}

namespace detail {

/// Kernel 3, padding 1, stride s output length; length 0 passes through.
inline std::size_t subsampled_length_or_zero(std::size_t len,
                                             std::size_t stride) {
  if (len == 0) return 0;
  return (len - 1) / stride + 1;
}

}  // namespace detail

/// Output length of the subsampling front end on an input of length len.
/// Stride-1 kinds preserve the length exactly.
inline std::size_t subsampled_length(std::size_t len, SubsampleKind kind) {
  if (len == 0) throw ValueError("sequence length must be at least 1");
  return detail::subsampled_length_or_zero(len, subsample_stride(kind));
}

/// Outcome of checking the CTC length constraint over (input, target)
/// length pairs: a pair violates when the subsampled input is shorter than
/// the target. recommended is the largest-stride conv1dN kind with zero
/// violations, or empty when even stride 1 violates.
struct CtcReport {
  std::size_t n_pairs = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  std::optional<SubsampleKind> recommended;
};

inline CtcReport ctc_feasibility(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    SubsampleKind kind) {
  CtcReport rep;
  rep.n_pairs = pairs.size();
  std::size_t stride = subsample_stride(kind);
  bool ok_by_stride[4] = {false, true, true, true};
  for (const auto& [input_len, target_len] : pairs) {
    if (detail::subsampled_length_or_zero(input_len, stride) < target_len)
      ++rep.violations;
    for (std::size_t s = 1; s <= 3; ++s)
      if (detail::subsampled_length_or_zero(input_len, s) < target_len)
        ok_by_stride[s] = false;
  }
  if (rep.n_pairs > 0)
    rep.violation_rate = static_cast<double>(rep.violations) /
                         static_cast<double>(rep.n_pairs);
  if (ok_by_stride[3]) rep.recommended = SubsampleKind::kConv1d3;
  else if (ok_by_stride[2]) rep.recommended = SubsampleKind::kConv1d2;
  else if (ok_by_stride[1]) rep.recommended = SubsampleKind::kConv1d1;
  return rep;
}

/// Length a CTC target effectively requires from the input: its length
/// plus one blank slot per consecutive repeated label.
inline std::size_t ctc_effective_target_length(const UnitSequence& s) {
  std::size_t extra = 0;
  for (std::size_t i = 1; i < s.units.size(); ++i)
    if (s.units[i] == s.units[i - 1]) ++extra;
  return s.units.size() + extra;
}

/// Corpus-level sequence-length accounting across the pipeline stages.
struct CorpusStats {
  double avg_len_raw = 0.0;
  double avg_len_dedup = 0.0;
  double avg_len_bpe = 0.0;
  double avg_len_subsampled = 0.0;
  double reduction_ratio = 0.0;  // 1 - avg_len_bpe / avg_len_raw
  int reduction_percent = 0;     // ratio rounded to whole percent
  SubsampleKind kind = SubsampleKind::kConv1d2;
  std::optional<double> target_avg_len;
  std::optional<CtcReport> feasibility;
};

namespace detail {

inline double mean_length(const std::vector<std::size_t>& lengths) {
  std::uint64_t total = 0;
  for (std::size_t l : lengths) total += l;
  return static_cast<double>(total) / static_cast<double>(lengths.size());
}

inline std::vector<std::size_t> corpus_lengths(const UnitCorpus& corpus) {
  std::vector<std::size_t> out(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    out[i] = corpus[i].units.size();
  return out;
}

}  // namespace detail

/// Stage means, reduction ratio, subsampled mean, and (when target lengths
/// are supplied) the CTC feasibility report for the chosen front end.
/// Lists must be index-aligned and non-empty.
inline CorpusStats corpus_stats(
    const std::vector<std::size_t>& raw_lengths,
    const std::vector<std::size_t>& dedup_lengths,
    const std::vector<std::size_t>& bpe_lengths, SubsampleKind kind,
    const std::optional<std::vector<std::size_t>>& target_lengths = {}) {
  if (raw_lengths.empty()) throw ValueError("empty corpus");
  if (dedup_lengths.size() != raw_lengths.size() ||
      bpe_lengths.size() != raw_lengths.size() ||
      (target_lengths && target_lengths->size() != raw_lengths.size()))
    throw ValueError("stage corpora are not index-aligned");

  CorpusStats st;
  st.kind = kind;
  st.avg_len_raw = detail::mean_length(raw_lengths);
  st.avg_len_dedup = detail::mean_length(dedup_lengths);
  st.avg_len_bpe = detail::mean_length(bpe_lengths);
  if (st.avg_len_raw < st.avg_len_dedup || st.avg_len_dedup < st.avg_len_bpe)
    throw ValueError(
        "stage means must be non-increasing from raw to dedup to bpe");

  std::uint64_t sub_total = 0;
  std::size_t stride = subsample_stride(kind);
  for (std::size_t l : bpe_lengths)
    sub_total += detail::subsampled_length_or_zero(l, stride);
  st.avg_len_subsampled = static_cast<double>(sub_total) /
                          static_cast<double>(bpe_lengths.size());

  st.reduction_ratio =
      st.avg_len_raw == 0.0 ? 0.0 : 1.0 - st.avg_len_bpe / st.avg_len_raw;
  st.reduction_percent =
      static_cast<int>(std::llround(st.reduction_ratio * 100.0));

  if (target_lengths) {
    st.target_avg_len = detail::mean_length(*target_lengths);
    std::vector<std::pair<std::size_t, std::size_t>> pairs(
        raw_lengths.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
      pairs[i] = {bpe_lengths[i], (*target_lengths)[i]};
    st.feasibility = ctc_feasibility(pairs, kind);
  }
  return st;
}

inline CorpusStats corpus_stats(
    const UnitCorpus& raw, const UnitCorpus& dedup, const UnitCorpus& bpe,
    SubsampleKind kind, const std::optional<UnitCorpus>& targets = {}) {
  std::optional<std::vector<std::size_t>> target_lengths;
  if (targets) target_lengths = detail::corpus_lengths(*targets);
  return corpus_stats(detail::corpus_lengths(raw),
                      detail::corpus_lengths(dedup),
                      detail::corpus_lengths(bpe), kind, target_lengths);
}

namespace detail {

inline std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

/// Human-readable report.
inline std::string format_stats_table(const CorpusStats& st) {
  std::string out;
  out += "stage        avg_len\n";
  out += "raw          " + detail::fmt_real(st.avg_len_raw) + "\n";
  out += "dedup        " + detail::fmt_real(st.avg_len_dedup) + "\n";
  out += "bpe          " + detail::fmt_real(st.avg_len_bpe) + "\n";
  out += "subsampled   " + detail::fmt_real(st.avg_len_subsampled) + " (" +
         subsample_name(st.kind) + ")\n";
  out += "reduction    " + std::to_string(st.reduction_percent) + "%\n";
  if (st.target_avg_len)
    out += "target       " + detail::fmt_real(*st.target_avg_len) + "\n";
  if (st.feasibility) {
    const CtcReport& r = *st.feasibility;
    out += "ctc          " + std::to_string(r.violations) + "/" +
           std::to_string(r.n_pairs) + " violations";
    if (r.recommended)
      out += ", recommend " + std::string(subsample_name(*r.recommended));
    out += "\n";
  }
  return out;
}

/// Machine-readable key=value report.
inline std::string format_stats_kv(const CorpusStats& st) {
  std::string out;
  out += "avg_len_raw=" + detail::fmt_real(st.avg_len_raw) + "\n";
  out += "avg_len_dedup=" + detail::fmt_real(st.avg_len_dedup) + "\n";
  out += "avg_len_bpe=" + detail::fmt_real(st.avg_len_bpe) + "\n";
  out += "avg_len_subsampled=" + detail::fmt_real(st.avg_len_subsampled) +
         "\n";
  out += "subsample.kind=" + std::string(subsample_name(st.kind)) + "\n";
  out += "reduction_ratio=" + std::to_string(st.reduction_percent) + "%\n";
  if (st.target_avg_len)
    out += "target_avg_len=" + detail::fmt_real(*st.target_avg_len) + "\n";
  if (st.feasibility) {
    const CtcReport& r = *st.feasibility;
    out += "ctc.n_pairs=" + std::to_string(r.n_pairs) + "\n";
    out += "ctc.violations=" + std::to_string(r.violations) + "\n";
    out += "ctc.violation_rate=" + detail::fmt_real(r.violation_rate) + "\n";
    if (r.recommended)
      out += "ctc.recommended=" +
             std::string(subsample_name(*r.recommended)) + "\n";
  }
  return out;
}

}  // namespace dsu
