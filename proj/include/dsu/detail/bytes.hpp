// dsu/detail/bytes.hpp

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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dsu/errors.hpp"

namespace dsu::detail {

// Little-endian encode/decode, independent of host byte order.

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

/// Cursor over an in-memory file image; throws CorruptError on short reads.
class ByteReader {
 public:
  explicit ByteReader(const std::string& buf) : buf_(buf) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(raw(1)[0]); }

  std::uint16_t u16() {
    const unsigned char* p = raw(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    const unsigned char* p = raw(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  std::uint64_t u64() {
    const unsigned char* p = raw(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string bytes(std::size_t n) {
    const unsigned char* p = raw(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }

  std::size_t remaining() const { return buf_.size() - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  const unsigned char* raw(std::size_t n) {
    if (buf_.size() - pos_ < n) throw CorruptError("unexpected end of file");
    const unsigned char* p =
        reinterpret_cast<const unsigned char*>(buf_.data()) + pos_;
    pos_ += n;
    return p;
  }

  const std::string& buf_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dsu::detail
