// dsu/fbank.hpp

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
#include <complex>
#include <cstdint>
#include <vector>

#include "dsu/errors.hpp"
#include "dsu/feature_matrix.hpp"
#include "dsu/wav.hpp"

namespace dsu {

/// Log mel filterbank ("FBANK") extraction settings. f_max < 0 means "use
/// the Nyquist frequency".
struct FbankConfig {
  std::uint32_t sample_rate = 16000;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  std::size_t n_fft = 512;
  std::size_t n_mels = 80;
  double f_min = 0.0;
  double f_max = -1.0;
  double log_floor = 1e-10;
};

inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

/// Triangular mel filters over the one-sided power spectrum. Each filter's
/// apex is snapped to the nearest FFT bin and carries weight exactly 1
/// there, so every row peaks at 1 in exactly one interior bin.
struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;  // n_fft / 2 + 1
  std::vector<float> weights;  // n_mels * n_bins, row-major
  std::vector<std::size_t> apex_bins;  // one snapped bin per filter
};

namespace detail {

inline bool is_power_of_two(std::size_t v) { return v > 0 && (v & (v - 1)) == 0; }

inline double resolved_f_max(const FbankConfig& cfg) {
  return cfg.f_max < 0 ? cfg.sample_rate / 2.0 : cfg.f_max;
}

inline void validate_fbank_config(const FbankConfig& cfg) {
  if (cfg.sample_rate == 0) throw ConfigError("sample_rate must be positive");
  if (cfg.frame_length_ms <= 0 || cfg.frame_shift_ms <= 0)
    throw ConfigError("frame length and shift must be positive");
  if (!is_power_of_two(cfg.n_fft))
    throw ConfigError("n_fft must be a power of two");
  if (cfg.n_mels == 0) throw ConfigError("n_mels must be positive");
  if (cfg.f_min < 0) throw ConfigError("f_min must be non-negative");
  double f_max = resolved_f_max(cfg);
  if (f_max <= cfg.f_min) throw ConfigError("f_max must exceed f_min");
  if (f_max > cfg.sample_rate / 2.0)
    throw ConfigError("f_max must not exceed the Nyquist frequency");
  if (cfg.log_floor <= 0) throw ConfigError("log_floor must be positive");
}

/// In-place iterative radix-2 FFT. a.size() must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace detail

/// Analytic filter center frequencies in Hz: the n_mels interior points of
/// a grid that is uniform in mel space between f_min and f_max. These are
/// the pre-snapping apex positions.
inline std::vector<double> mel_centers_hz(const FbankConfig& cfg) {
  detail::validate_fbank_config(cfg);
  const double m_lo = hz_to_mel(cfg.f_min);
  const double m_hi = hz_to_mel(detail::resolved_f_max(cfg));
  std::vector<double> centers(cfg.n_mels);
  for (std::size_t i = 0; i < cfg.n_mels; ++i) {
    double mel = m_lo + static_cast<double>(i + 1) * (m_hi - m_lo) /
                            static_cast<double>(cfg.n_mels + 1);
    centers[i] = mel_to_hz(mel);
  }
  return centers;
}

inline MelFilterbank mel_filterbank(const FbankConfig& cfg) {
  detail::validate_fbank_config(cfg);
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  const double m_lo = hz_to_mel(cfg.f_min);
  const double m_hi = hz_to_mel(detail::resolved_f_max(cfg));

  // Snap every grid point (edges and apexes) to its nearest FFT bin.
  std::vector<long> bins(cfg.n_mels + 2);
  for (std::size_t j = 0; j < bins.size(); ++j) {
    double mel = m_lo + static_cast<double>(j) * (m_hi - m_lo) /
                            static_cast<double>(cfg.n_mels + 1);
    double hz = mel_to_hz(mel);
    bins[j] = std::lround(hz * static_cast<double>(cfg.n_fft) /
                          static_cast<double>(cfg.sample_rate));
  }

  MelFilterbank fb;
  fb.n_mels = cfg.n_mels;
  fb.n_bins = n_bins;
  fb.weights.assign(cfg.n_mels * n_bins, 0.0f);
  fb.apex_bins.resize(cfg.n_mels);
  // Dense banks may snap neighboring grid points onto one bin; a filter
  // only becomes invalid when its whole support collapses to a single grid
  // point or its peak lands on the DC or Nyquist bin.
  for (std::size_t i = 0; i < cfg.n_mels; ++i) {
    const long left = bins[i], apex = bins[i + 1], right = bins[i + 2];
    if (left == right || apex <= 0 || apex >= static_cast<long>(n_bins) - 1)
      throw ConfigError(
          "mel filters collapse onto shared FFT bins; lower n_mels or raise "
          "n_fft");
    fb.apex_bins[i] = static_cast<std::size_t>(apex);
    float* row = fb.weights.data() + i * n_bins;
    for (long b = left + 1; b < apex; ++b)
      row[b] = static_cast<float>(b - left) / static_cast<float>(apex - left);
    for (long b = apex + 1; b < right; ++b)
      row[b] =
          static_cast<float>(right - b) / static_cast<float>(right - apex);
    row[apex] = 1.0f;
  }
  return fb;
}

/// Extracts log mel filterbank features from a mono waveform. Frames are
/// frame_length_ms long every frame_shift_ms, Hann windowed, zero-padded to
/// n_fft, and only fully contained frames are kept. Throws ValueError when
/// the signal is shorter than one frame.
inline FeatureMatrix compute_fbank(const std::vector<float>& samples,
                                   const FbankConfig& cfg) {
  detail::validate_fbank_config(cfg);
  const std::size_t win = static_cast<std::size_t>(
      std::lround(cfg.frame_length_ms * cfg.sample_rate / 1000.0));
  const std::size_t hop = static_cast<std::size_t>(
      std::lround(cfg.frame_shift_ms * cfg.sample_rate / 1000.0));
  if (win < 2 || hop == 0)
    throw ConfigError("frame length and shift resolve to too few samples");
  if (cfg.n_fft < win)
    throw ConfigError("n_fft must be at least the frame length in samples");
  if (samples.size() < win)
    throw ValueError("signal shorter than one frame");
  const std::size_t n_frames = (samples.size() - win) / hop + 1;
  const std::size_t n_bins = cfg.n_fft / 2 + 1;

  std::vector<double> window(win);
  for (std::size_t n = 0; n < win; ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) /
                                     static_cast<double>(win - 1));

  MelFilterbank fb = mel_filterbank(cfg);
  FeatureMatrix out;
  out.n_frames = n_frames;
  out.n_dims = cfg.n_mels;
  out.data.resize(n_frames * cfg.n_mels);

  std::vector<std::complex<double>> buf(cfg.n_fft);
  std::vector<double> power(n_bins);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const float* frame = samples.data() + t * hop;
    for (std::size_t n = 0; n < win; ++n)
      buf[n] = std::complex<double>(frame[n] * window[n], 0.0);
    for (std::size_t n = win; n < cfg.n_fft; ++n) buf[n] = 0.0;
    detail::fft_radix2(buf);
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(buf[k]);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const float* row = fb.weights.data() + m * n_bins;
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += row[k] * power[k];
      if (e < cfg.log_floor) e = cfg.log_floor;
      out.at(t, m) = static_cast<float>(std::log(e));
    }
  }
  return out;
}

/// Waveform overload; the file's sample rate must match the configured one.
inline FeatureMatrix compute_fbank(const Waveform& wav,
                                   const FbankConfig& cfg) {
  if (wav.sample_rate != cfg.sample_rate)
    throw ConfigError("waveform sample rate " +
                     std::to_string(wav.sample_rate) +
                     " does not match configured rate " +
                     std::to_string(cfg.sample_rate));
  return compute_fbank(wav.samples, cfg);
}

}  // namespace dsu
