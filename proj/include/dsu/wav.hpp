// dsu/wav.hpp

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
#include <string>
#include <vector>

#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"

namespace dsu {

/// Mono waveform normalized to [-1, 1) by dividing int16 samples by 32768.
struct Waveform {
  std::uint32_t sample_rate = 0;
  std::vector<float> samples;
};

/// Reads a RIFF/WAVE file holding 16-bit PCM mono audio. Walks the chunk
/// list so extra chunks (LIST, fact, ...) before or after "data" are fine.
/// Anything that is not 16-bit PCM mono raises FormatError.
inline Waveform load_wav(const std::filesystem::path& path) {
  std::string buf = detail::read_file(path);
  detail::ByteReader r(buf);
  std::string riff, wave;
  try {
    riff = r.bytes(4);
    r.u32();  // declared RIFF size; trust the actual file length instead
    wave = r.bytes(4);
  } catch (const CorruptError&) {
    throw FormatError("not a WAV file: truncated RIFF header");
  }
  if (riff != "RIFF" || wave != "WAVE")
    throw FormatError("not a WAV file: bad RIFF/WAVE tags");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, audio_format = 0;
  std::uint32_t sample_rate = 0;
  std::string data;
  bool have_data = false;

  while (r.remaining() >= 8) {
    std::string id = r.bytes(4);
    std::uint32_t size = r.u32();
    if (size > r.remaining()) throw CorruptError("WAV chunk overruns file");
    std::string body = r.bytes(size);
    if (size % 2 == 1 && r.remaining() > 0) r.bytes(1);  // chunk padding
    if (id == "fmt ") {
      if (body.size() < 16) throw CorruptError("WAV fmt chunk too short");
      detail::ByteReader f(body);
      audio_format = f.u16();
      channels = f.u16();
      sample_rate = f.u32();
      f.u32();  // byte rate
      f.u16();  // block align
      bits = f.u16();
      have_fmt = true;
    } else if (id == "data") {
      data = std::move(body);
      have_data = true;
    }
  }
  if (!have_fmt) throw FormatError("WAV file has no fmt chunk");
  if (!have_data) throw FormatError("WAV file has no data chunk");
  if (audio_format != 1)
    throw FormatError("unsupported WAV encoding: only PCM is accepted");
  if (bits != 16)
    throw FormatError("unsupported WAV sample width: only 16-bit is accepted");
  if (channels != 1)
    throw FormatError("unsupported WAV channel count: only mono is accepted");
  if (sample_rate == 0) throw CorruptError("WAV sample rate is zero");
  if (data.size() % 2 != 0) throw CorruptError("WAV data chunk is odd-sized");

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(data.size() / 2);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    std::int16_t s = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8)));
    w.samples[i] = static_cast<float>(s) / 32768.0f;
  }
  return w;
}

}  // namespace dsu
