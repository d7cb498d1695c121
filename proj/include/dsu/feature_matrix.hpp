// dsu/feature_matrix.hpp

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
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"

namespace dsu {

/// Dense row-major float32 matrix: one row per frame, one column per
/// feature dimension.
struct FeatureMatrix {
  std::size_t n_frames = 0;
  std::size_t n_dims = 0;
  std::vector<float> data;  // n_frames * n_dims, row-major

  float& at(std::size_t frame, std::size_t dim) {
    return data[frame * n_dims + dim];
  }
  float at(std::size_t frame, std::size_t dim) const {
    return data[frame * n_dims + dim];
  }
  const float* row(std::size_t frame) const {
    return data.data() + frame * n_dims;
  }
};

enum class FeatureFormat { kDsf, kText };

namespace detail {

constexpr char kDsfMagic[4] = {'D', 'S', 'F', '1'};
constexpr std::uint16_t kDsfVersion = 1;
constexpr std::uint16_t kDsfDtypeF32 = 1;

inline void check_finite(const FeatureMatrix& m) {
  for (float v : m.data) {
    if (!std::isfinite(v)) throw ValueError("non-finite feature value");
  }
}

}  // namespace detail

/// Serializes a matrix to the DSF byte layout:
/// "DSF1" | u16 version=1 | u16 dtype=1 (float32) | u64 rows | u64 cols |
/// row-major float32 payload, everything little-endian.
inline std::string encode_dsf(const FeatureMatrix& m) {
  if (m.data.size() != m.n_frames * m.n_dims)
    throw ValueError("matrix buffer size does not match its shape");
  detail::check_finite(m);
  std::string out;
  out.reserve(24 + 4 * m.data.size());
  out.append(detail::kDsfMagic, 4);
  detail::put_u16(out, detail::kDsfVersion);
  detail::put_u16(out, detail::kDsfDtypeF32);
  detail::put_u64(out, m.n_frames);
  detail::put_u64(out, m.n_dims);
  for (float v : m.data) detail::put_f32(out, v);
  return out;
}

inline FeatureMatrix decode_dsf(const std::string& buf) {
  detail::ByteReader r(buf);
  std::string magic;
  try {
    magic = r.bytes(4);
  } catch (const CorruptError&) {
    throw FormatError("not a DSF file: truncated magic");
  }
  if (magic != std::string(detail::kDsfMagic, 4))
    throw FormatError("not a DSF file: bad magic");
  std::uint16_t version, dtype;
  std::uint64_t rows, cols;
  try {
    version = r.u16();
    dtype = r.u16();
    rows = r.u64();
    cols = r.u64();
  } catch (const CorruptError&) {
    throw FormatError("not a DSF file: truncated header");
  }
  if (version != detail::kDsfVersion)
    throw FormatError("unsupported DSF version " + std::to_string(version));
  if (dtype != detail::kDsfDtypeF32)
    throw FormatError("unsupported DSF dtype " + std::to_string(dtype));
  if (rows > 0 && cols == 0)
    throw CorruptError("DSF header declares rows with zero columns");
  if (cols != 0 && rows > (std::uint64_t(-1) / 4) / cols)
    throw CorruptError("DSF header declares an implausible payload size");
  std::uint64_t want = rows * cols * 4;
  if (r.remaining() != want)
    throw CorruptError("DSF payload size mismatch: expected " +
                       std::to_string(want) + " bytes, found " +
                       std::to_string(r.remaining()));
  FeatureMatrix m;
  m.n_frames = static_cast<std::size_t>(rows);
  m.n_dims = static_cast<std::size_t>(cols);
  m.data.resize(m.n_frames * m.n_dims);
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = r.f32();
  detail::check_finite(m);
  return m;
}

/// Parses whitespace-separated float rows, one frame per line. Blank lines
/// are skipped; every kept row must have the same width.
inline FeatureMatrix parse_feature_text(const std::string& text) {
  FeatureMatrix m;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::vector<float> row;
    std::string tok;
    while (fields >> tok) {
      std::size_t used = 0;
      float v;
      try {
        v = std::stof(tok, &used);
      } catch (const std::exception&) {
        throw CorruptError("bad feature value: '" + tok + "'");
      }
      if (used != tok.size())
        throw CorruptError("bad feature value: '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (m.n_dims == 0) {
      m.n_dims = row.size();
    } else if (row.size() != m.n_dims) {
      throw CorruptError("ragged feature text: row " +
                         std::to_string(m.n_frames + 1) + " has " +
                         std::to_string(row.size()) + " values, expected " +
                         std::to_string(m.n_dims));
    }
    m.data.insert(m.data.end(), row.begin(), row.end());
    ++m.n_frames;
  }
  if (m.n_frames == 0) throw ValueError("feature text contains no rows");
  detail::check_finite(m);
  return m;
}

inline FeatureMatrix load_features(const std::filesystem::path& path,
                                   FeatureFormat format) {
  std::string buf = detail::read_file(path);
  if (format == FeatureFormat::kDsf) return decode_dsf(buf);
  return parse_feature_text(buf);
}

/// Picks the format from the file extension: ".dsf" is binary, anything
/// else is text.
inline FeatureMatrix load_features(const std::filesystem::path& path) {
  FeatureFormat f = path.extension() == ".dsf" ? FeatureFormat::kDsf
                                               : FeatureFormat::kText;
  return load_features(path, f);
}

inline void save_features(const std::filesystem::path& path,
                          const FeatureMatrix& m) {
  detail::write_file(path, encode_dsf(m));
}

}  // namespace dsu
