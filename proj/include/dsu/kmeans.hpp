// dsu/kmeans.hpp

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
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dsu/detail/bytes.hpp"
#include "dsu/errors.hpp"
#include "dsu/feature_matrix.hpp"
#include "dsu/rng.hpp"
#include "dsu/units.hpp"

namespace dsu {

enum class KmeansInit { kPlusPlus, kRandom };

/// batch_size = 0 trains full-batch Lloyd; any positive value switches to
/// mini-batch updates with a final full-data inertia pass.
struct KmeansConfig {
  std::uint32_t k = 0;
  std::size_t max_iters = 100;
  double tol = 1e-4;  // relative inertia improvement that counts as converged
  std::uint64_t seed = 0;
  KmeansInit init = KmeansInit::kPlusPlus;
  std::size_t batch_size = 0;
};

/// Trained quantizer: k centroids of dimension dim under squared-Euclidean
/// distance, plus training diagnostics. inertia_history holds one entry
/// per Lloyd assignment pass, in order.
struct Codebook {
  std::uint32_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centroids;  // k * dim, row-major
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double inertia = 0.0;
  std::vector<double> inertia_history;

  const float* centroid(std::size_t i) const {
    return centroids.data() + i * dim;
  }
};

namespace detail {

/// Squared Euclidean distance in float with eight independent partial sums
/// and a fixed reduction tree, so results are reproducible and the loop
/// vectorizes without reassociation flags.
inline float sq_dist_f(const float* a, const float* b, std::size_t d) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      float diff = a[i + j] - b[i + j];
      acc[j] += diff * diff;
    }
  }
  for (; i < d; ++i) {
    float diff = a[i] - b[i];
    acc[i & 7] += diff * diff;
  }
  float s01 = acc[0] + acc[1], s23 = acc[2] + acc[3];
  float s45 = acc[4] + acc[5], s67 = acc[6] + acc[7];
  return (s01 + s23) + (s45 + s67);
}

/// Double-precision twin of sq_dist_f for diagnostics that need tighter
/// accumulation than float allows.
inline double sq_dist_d(const float* a, const float* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += diff * diff;
  }
  return acc;
}

inline std::uint32_t nearest_centroid(const Codebook& cb, const float* x) {
  std::uint32_t best = 0;
  float best_d = sq_dist_f(x, cb.centroid(0), cb.dim);
  for (std::uint32_t c = 1; c < cb.k; ++c) {
    float d = sq_dist_f(x, cb.centroid(c), cb.dim);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline void kmeanspp_init(const FeatureMatrix& data, std::uint32_t k,
                          SplitMix64& rng, std::vector<float>& centroids) {
  const std::size_t n = data.n_frames, d = data.n_dims;
  std::size_t first = static_cast<std::size_t>(rng.uniform(n));
  std::copy_n(data.row(first), d, centroids.begin());
  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i)
    dist2[i] = sq_dist_d(data.row(i), centroids.data(), d);
  for (std::uint32_t c = 1; c < k; ++c) {
    double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    std::size_t pick;
    if (total <= 0.0) {
      // All remaining mass sits on already-chosen points (duplicates).
      pick = static_cast<std::size_t>(rng.uniform(n));
    } else {
      double r = rng.uniform_double() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += dist2[i];
        if (cum > r) {
          pick = i;
          break;
        }
      }
    }
    float* dst = centroids.data() + static_cast<std::size_t>(c) * d;
    std::copy_n(data.row(pick), d, dst);
    for (std::size_t i = 0; i < n; ++i) {
      double nd = sq_dist_d(data.row(i), dst, d);
      if (nd < dist2[i]) dist2[i] = nd;
    }
  }
}

inline void random_init(const FeatureMatrix& data, std::uint32_t k,
                        SplitMix64& rng, std::vector<float>& centroids) {
  const std::size_t n = data.n_frames, d = data.n_dims;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::uint32_t c = 0; c < k; ++c) {
    std::size_t j = c + static_cast<std::size_t>(rng.uniform(n - c));
    std::swap(idx[c], idx[j]);
    std::copy_n(data.row(idx[c]), d,
                centroids.begin() + static_cast<std::size_t>(c) * d);
  }
}

}  // namespace detail

/// Maps every frame to the index of its nearest centroid (squared
/// Euclidean, ties to the lowest index). Output is a raw-stage sequence
/// over vocabulary k.
inline UnitSequence assign(const Codebook& cb, const FeatureMatrix& frames) {
  if (frames.n_dims != cb.dim)
    throw ValueError("feature dimension " + std::to_string(frames.n_dims) +
                     " does not match codebook dimension " +
                     std::to_string(cb.dim));
  UnitSequence s;
  s.vocab_size = cb.k;
  s.stage = Stage::kRaw;
  s.units.resize(frames.n_frames);
  for (std::size_t i = 0; i < frames.n_frames; ++i)
    s.units[i] = detail::nearest_centroid(cb, frames.row(i));
  return s;
}

/// Sum of squared distances from each frame to its nearest centroid,
/// accumulated in double precision.
inline double inertia(const Codebook& cb, const FeatureMatrix& data) {
  if (data.n_dims != cb.dim)
    throw ValueError("feature dimension " + std::to_string(data.n_dims) +
                     " does not match codebook dimension " +
                     std::to_string(cb.dim));
  double total = 0.0;
  for (std::size_t i = 0; i < data.n_frames; ++i) {
    const float* x = data.row(i);
    double best = detail::sq_dist_d(x, cb.centroid(0), cb.dim);
    for (std::uint32_t c = 1; c < cb.k; ++c) {
      double d = detail::sq_dist_d(x, cb.centroid(c), cb.dim);
      if (d < best) best = d;
    }
    total += best;
  }
  return total;
}

/// Lloyd's algorithm (or mini-batch updates when batch_size > 0) with
/// kmeans++ or random-point initialization. Full-batch runs stop after
/// max_iters assignment passes or when the relative inertia improvement
/// drops below tol; empty clusters are re-seeded from the point currently
/// farthest from its centroid. All randomness comes from the given seed,
/// so a fixed seed reproduces the codebook bit for bit.
inline Codebook kmeans_fit(const FeatureMatrix& data,
                           const KmeansConfig& cfg) {
  const std::size_t n = data.n_frames, d = data.n_dims;
  if (cfg.k == 0) throw ValueError("k must be at least 1");
  if (n < cfg.k)
    throw ValueError("cannot fit " + std::to_string(cfg.k) +
                     " clusters to " + std::to_string(n) + " frames");
  if (d == 0) throw ValueError("feature dimension must be at least 1");
  if (cfg.tol < 0) throw ValueError("tol must be non-negative");
  if (cfg.max_iters == 0) throw ValueError("max_iters must be at least 1");
  detail::check_finite(data);

  Codebook cb;
  cb.k = cfg.k;
  cb.dim = d;
  cb.seed = cfg.seed;
  cb.centroids.resize(static_cast<std::size_t>(cfg.k) * d);
  SplitMix64 rng(cfg.seed);
  if (cfg.init == KmeansInit::kPlusPlus)
    detail::kmeanspp_init(data, cfg.k, rng, cb.centroids);
  else
    detail::random_init(data, cfg.k, rng, cb.centroids);

  if (cfg.batch_size > 0 && cfg.batch_size < n) {
    // Mini-batch updates: per-center sample counts give the 1/count
    // learning rate; convergence is by iteration budget only.
    std::vector<std::uint64_t> counts(cfg.k, 0);
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
      for (std::size_t b = 0; b < cfg.batch_size; ++b) {
        std::size_t i = static_cast<std::size_t>(rng.uniform(n));
        const float* x = data.row(i);
        std::uint32_t c = detail::nearest_centroid(cb, x);
        float eta = 1.0f / static_cast<float>(++counts[c]);
        float* ctr = cb.centroids.data() + static_cast<std::size_t>(c) * d;
        for (std::size_t j = 0; j < d; ++j)
          ctr[j] += eta * (x[j] - ctr[j]);
      }
    }
    cb.iterations = cfg.max_iters;
    cb.inertia = inertia(cb, data);
    cb.inertia_history.push_back(cb.inertia);
    return cb;
  }

  std::vector<std::uint32_t> labels(n);
  std::vector<double> point_d2(n);
  std::vector<double> sums(static_cast<std::size_t>(cfg.k) * d);
  std::vector<std::uint64_t> counts(cfg.k);
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    double cur = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t c = detail::nearest_centroid(cb, data.row(i));
      labels[i] = c;
      point_d2[i] = detail::sq_dist_d(data.row(i), cb.centroid(c), d);
      cur += point_d2[i];
    }
    cb.inertia_history.push_back(cur);
    if (cur == 0.0) break;
    if (it >= 2) {
      double prev = cb.inertia_history[it - 2];
      if (prev - cur < cfg.tol * prev) break;
    }
    if (it == cfg.max_iters) break;  // keep centroids matching the last pass

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::uint64_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const float* x = data.row(i);
      double* s = sums.data() + static_cast<std::size_t>(labels[i]) * d;
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
      ++counts[labels[i]];
    }
    std::vector<bool> reseeded(n, false);
    for (std::uint32_t c = 0; c < cfg.k; ++c) {
      float* ctr = cb.centroids.data() + static_cast<std::size_t>(c) * d;
      if (counts[c] > 0) {
        const double* s = sums.data() + static_cast<std::size_t>(c) * d;
        for (std::size_t j = 0; j < d; ++j)
          ctr[j] = static_cast<float>(s[j] / static_cast<double>(counts[c]));
      } else {
        // Re-seed from the point farthest from its centroid, skipping
        // points already consumed by another empty cluster this pass.
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (reseeded[i]) continue;
          if (point_d2[i] > far_d) {
            far_d = point_d2[i];
            far = i;
          }
        }
        reseeded[far] = true;
        std::copy_n(data.row(far), d, ctr);
      }
    }
  }
  cb.iterations = cb.inertia_history.size();
  cb.inertia = cb.inertia_history.back();
  return cb;
}

/// Codebook file pair: a DSF matrix of centroids plus "<path>.meta", a
/// key=value sidecar recording k, dim, seed, iterations, and inertia.
inline void save_codebook(const std::filesystem::path& path,
                          const Codebook& cb) {
  FeatureMatrix m;
  m.n_frames = cb.k;
  m.n_dims = cb.dim;
  m.data = cb.centroids;
  save_features(path, m);
  char inertia_str[64];
  std::snprintf(inertia_str, sizeof(inertia_str), "%.17g", cb.inertia);
  std::string meta = "k=" + std::to_string(cb.k) + "\n" +
                     "dim=" + std::to_string(cb.dim) + "\n" +
                     "seed=" + std::to_string(cb.seed) + "\n" +
                     "iterations=" + std::to_string(cb.iterations) + "\n" +
                     "inertia=" + inertia_str + "\n";
  std::filesystem::path meta_path = path;
  meta_path += ".meta";
  detail::write_file(meta_path, meta);
}

inline Codebook load_codebook(const std::filesystem::path& path) {
  FeatureMatrix m = load_features(path, FeatureFormat::kDsf);
  if (m.n_frames == 0 || m.n_dims == 0)
    throw CorruptError("codebook matrix is empty");
  Codebook cb;
  cb.k = static_cast<std::uint32_t>(m.n_frames);
  cb.dim = m.n_dims;
  cb.centroids = std::move(m.data);

  std::filesystem::path meta_path = path;
  meta_path += ".meta";
  std::istringstream lines(detail::read_file(meta_path));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw CorruptError("bad codebook metadata line: '" + line + "'");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    try {
      if (key == "k") {
        if (std::stoull(val) != cb.k)
          throw CorruptError("codebook metadata k does not match the matrix");
      } else if (key == "dim") {
        if (std::stoull(val) != cb.dim)
          throw CorruptError(
              "codebook metadata dim does not match the matrix");
      } else if (key == "seed") {
        cb.seed = std::stoull(val);
      } else if (key == "iterations") {
        cb.iterations = std::stoull(val);
      } else if (key == "inertia") {
        cb.inertia = std::stod(val);
      } else {
        throw CorruptError("unknown codebook metadata key: '" + key + "'");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw CorruptError("bad codebook metadata value: '" + line + "'");
    }
  }
  return cb;
}

}  // namespace dsu
