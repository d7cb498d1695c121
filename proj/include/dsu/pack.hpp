// dsu/pack.hpp

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

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"
#include "dsu/units.hpp"

namespace dsu {

namespace detail {

constexpr char kDsuMagic[4] = {'D', 'S', 'U', '1'};
constexpr std::uint16_t kDsuVersion = 1;

/// Appends fixed-width codes most-significant-bit first.
class BitWriter {
 public:
  explicit BitWriter(std::string& out) : out_(out) {}

  void put(std::uint32_t value, unsigned bits) {
    for (unsigned b = bits; b-- > 0;) {
      cur_ = static_cast<std::uint8_t>((cur_ << 1) | ((value >> b) & 1));
      if (++filled_ == 8) {
        out_.push_back(static_cast<char>(cur_));
        cur_ = 0;
        filled_ = 0;
      }
    }
  }

  /// Zero-pads the last partial byte.
  void finish() {
    if (filled_ == 0) return;
    out_.push_back(static_cast<char>(cur_ << (8 - filled_)));
    cur_ = 0;
    filled_ = 0;
  }

 private:
  std::string& out_;
  std::uint8_t cur_ = 0;
  unsigned filled_ = 0;
};

/// Reads fixed-width codes most-significant-bit first.
class BitReader {
 public:
  BitReader(const unsigned char* data, std::size_t n_bytes)
      : data_(data), n_bits_(n_bytes * 8) {}

  std::uint32_t get(unsigned bits) {
    std::uint32_t v = 0;
    for (unsigned b = 0; b < bits; ++b) {
      std::size_t i = pos_ + b;
      v = (v << 1) | ((data_[i >> 3] >> (7 - (i & 7))) & 1);
    }
    pos_ += bits;
    return v;
  }

  /// True when every bit from the cursor to the end of the buffer is zero.
  bool padding_is_zero() const {
    for (std::size_t i = pos_; i < n_bits_; ++i)
      if ((data_[i >> 3] >> (7 - (i & 7))) & 1) return false;
    return true;
  }

 private:
  const unsigned char* data_;
  std::size_t n_bits_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Fixed code width for a vocabulary: ceil(log2(max(vocab_size, 2))).
inline unsigned bits_per_unit(std::uint32_t vocab_size) {
  if (vocab_size <= 2) return 1;
  return static_cast<unsigned>(std::bit_width(vocab_size - 1));
}

/// Serializes a corpus to the DSU byte layout: "DSU1" | u16 version=1 |
/// u32 vocab_size | u8 bits_per_unit | u64 n_sequences | one u32 length
/// per sequence | payload of concatenated fixed-width codes, bits packed
/// most-significant first and zero-padded to a byte boundary once at the
/// end of the file. Integers are little-endian.
inline std::string encode_packed_units(const UnitCorpus& corpus,
                                       std::uint32_t vocab_size) {
  const unsigned bits = bits_per_unit(vocab_size);
  std::uint64_t total_units = 0;
  for (const UnitSequence& s : corpus) {
    for (std::uint32_t u : s.units)
      if (u >= vocab_size)
        throw ValueError("unit " + std::to_string(u) +
                         " does not fit vocabulary " +
                         std::to_string(vocab_size));
    total_units += s.units.size();
  }
  std::string out;
  out.reserve(19 + 4 * corpus.size() + (total_units * bits + 7) / 8);
  out.append(detail::kDsuMagic, 4);
  detail::put_u16(out, detail::kDsuVersion);
  detail::put_u32(out, vocab_size);
  out.push_back(static_cast<char>(bits));
  detail::put_u64(out, corpus.size());
  for (const UnitSequence& s : corpus)
    detail::put_u32(out, static_cast<std::uint32_t>(s.units.size()));
  detail::BitWriter w(out);
  for (const UnitSequence& s : corpus)
    for (std::uint32_t u : s.units) w.put(u, bits);
  w.finish();
  return out;
}

/// Exact inverse of encode_packed_units. Sequences come back at stage raw
/// with the file's vocabulary; source IDs are not stored in this format.
inline UnitCorpus decode_packed_units(const std::string& buf) {
  detail::ByteReader r(buf);
  std::string magic;
  std::uint16_t version;
  std::uint32_t vocab_size;
  std::uint8_t bits;
  std::uint64_t n_sequences;
  try {
    magic = r.bytes(4);
    version = r.u16();
    vocab_size = r.u32();
    bits = r.u8();
    n_sequences = r.u64();
  } catch (const CorruptError&) {
    throw FormatError("not a DSU file: truncated header");
  }
  if (magic != std::string(detail::kDsuMagic, 4))
    throw FormatError("not a DSU file: bad magic");
  if (version != detail::kDsuVersion)
    throw FormatError("unsupported DSU version " + std::to_string(version));
  if (bits != bits_per_unit(vocab_size))
    throw CorruptError("header bit width " + std::to_string(bits) +
                       " does not match vocabulary " +
                       std::to_string(vocab_size));

  std::vector<std::uint32_t> lengths(n_sequences);
  std::uint64_t total_units = 0;
  try {
    for (auto& len : lengths) {
      len = r.u32();
      total_units += len;
    }
  } catch (const CorruptError&) {
    throw FormatError("DSU file truncated in the length table");
  }
  const std::uint64_t payload_bytes = (total_units * bits + 7) / 8;
  if (r.remaining() < payload_bytes)
    throw FormatError("DSU file truncated in the payload");
  if (r.remaining() > payload_bytes)
    throw FormatError("DSU file has trailing bytes after the payload");

  detail::BitReader br(
      reinterpret_cast<const unsigned char*>(buf.data()) + r.pos(),
      static_cast<std::size_t>(payload_bytes));
  UnitCorpus corpus(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    UnitSequence& s = corpus[i];
    s.vocab_size = vocab_size;
    s.stage = Stage::kRaw;
    s.units.resize(lengths[i]);
    for (auto& u : s.units) {
      u = br.get(bits);
      if (u >= vocab_size)
        throw CorruptError("decoded unit " + std::to_string(u) +
                           " exceeds vocabulary " +
                           std::to_string(vocab_size));
    }
  }
  if (!br.padding_is_zero())
    throw CorruptError("DSU payload padding bits are not zero");
  return corpus;
}

inline void pack_units(const UnitCorpus& corpus, std::uint32_t vocab_size,
                       const std::filesystem::path& path) {
  detail::write_file(path, encode_packed_units(corpus, vocab_size));
}

inline UnitCorpus unpack_units(const std::filesystem::path& path) {
  return decode_packed_units(detail::read_file(path));
}

/// Per-frame storage ratio between a float feature vector and one packed
/// unit code: (feature_dim * feature_bits) / bits_per_unit.
inline double compression_ratio(std::uint64_t feature_dim,
                                std::uint64_t feature_bits,
                                std::uint64_t bits_per_unit) {
  if (feature_dim == 0 || feature_bits == 0 || bits_per_unit == 0)
    throw ValueError("compression_ratio arguments must be positive");
  return static_cast<double>(feature_dim) *
         static_cast<double>(feature_bits) /
         static_cast<double>(bits_per_unit);
}

}  // namespace dsu
