// dsu/rng.hpp

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

namespace dsu {

/// splitmix64 generator. Every random decision in the toolkit flows through
/// this generator so that seeded runs replay identically across platforms
/// and implementations.
///
/// Contract: each call to next() consumes exactly one 64-bit output;
/// uniform(m) maps one output to {0..m-1} by multiply-shift
/// (floor(x * m / 2^64)); uniform_double() maps one output to [0, 1) using
/// the top 53 bits.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw from {0..m-1}; consumes one output. m must be nonzero.
  std::uint64_t uniform(std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * m) >> 64);
  }

  /// Uniform draw from [0, 1) with 53-bit resolution; consumes one output.
  double uniform_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Seed for derived stream `stream`: the (stream+1)-th raw output of a
/// splitmix64 generator seeded with `seed`. The CLI assigns stream 0 to
/// k-means training and stream 1 to time masking.
inline std::uint64_t derive_stream_seed(std::uint64_t seed,
                                        std::uint64_t stream) {
  SplitMix64 g(seed);
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= stream; ++i) out = g.next();
  return out;
}

}  // namespace dsu
