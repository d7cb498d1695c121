// tools/dsu.cpp

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

// dsu: discretize speech features into unit sequences and shepherd them
// through de-duplication, subword merging, bit-packed storage, and the
// length/feasibility reports. One binary, one subcommand per stage, plus
// `pipeline` to run the whole chain from a manifest.
//
// Exit codes: 0 success, 1 usage error, 2 data/format/config error.
// Logging: DSU_LOG={error,warn,info,debug} on standard error.
//
// Determinism: every stochastic stage derives its generator from the
// top-level --seed through fixed stream indices (kmeans-train uses stream
// 0, mask uses stream 1, and mask gives sequence i the i-th stream of its
// own seed). Running the staged commands with one seed therefore matches
// `pipeline` byte for byte.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsu/dsu.hpp"

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kKmeansStream = 0;
constexpr std::uint64_t kMaskStream = 1;

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel g_log_level = LogLevel::kWarn;

void init_log_level() {
  const char* env = std::getenv("DSU_LOG");
  if (!env) return;
  std::string v(env);
  if (v == "error") g_log_level = LogLevel::kError;
  else if (v == "warn") g_log_level = LogLevel::kWarn;
  else if (v == "info") g_log_level = LogLevel::kInfo;
  else if (v == "debug") g_log_level = LogLevel::kDebug;
  else
    std::cerr << "dsu: [warn] unknown DSU_LOG level '" << v
              << "', using warn\n";
}

void log_at(LogLevel lvl, const char* tag, const std::string& msg) {
  if (static_cast<int>(lvl) <= static_cast<int>(g_log_level))
    std::cerr << "dsu: [" << tag << "] " << msg << "\n";
}

void log_info(const std::string& msg) { log_at(LogLevel::kInfo, "info", msg); }
void log_debug(const std::string& msg) {
  log_at(LogLevel::kDebug, "debug", msg);
}

// ---------------------------------------------------------------------------
// Shared helpers

std::string trim_line(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// One path per line, blank lines and # comments skipped; relative entries
/// resolve against the list file's directory.
std::vector<fs::path> read_path_list(const fs::path& list_path) {
  std::istringstream lines(dsu::detail::read_file(list_path));
  fs::path dir = list_path.parent_path();
  std::vector<fs::path> out;
  std::string line;
  while (std::getline(lines, line)) {
    std::string t = trim_line(line);
    if (t.empty() || t[0] == '#') continue;
    fs::path p(t);
    out.push_back(p.is_absolute() ? p : dir / p);
  }
  if (out.empty())
    throw dsu::ValueError("path list is empty: " + list_path.string());
  return out;
}

std::vector<fs::path> gather_inputs(const std::vector<std::string>& ins,
                                    const std::string& list) {
  std::vector<fs::path> paths;
  for (const std::string& p : ins) paths.emplace_back(p);
  if (!list.empty()) {
    std::vector<fs::path> more = read_path_list(list);
    paths.insert(paths.end(), more.begin(), more.end());
  }
  if (paths.empty())
    throw dsu::ConfigError("no inputs: pass --in and/or --list");
  return paths;
}

dsu::FeatureMatrix concat_features(const std::vector<dsu::FeatureMatrix>& ms) {
  dsu::FeatureMatrix all;
  for (const dsu::FeatureMatrix& m : ms) {
    if (all.n_dims == 0) all.n_dims = m.n_dims;
    else if (m.n_dims != all.n_dims)
      throw dsu::ValueError("feature files disagree on dimension: " +
                            std::to_string(all.n_dims) + " vs " +
                            std::to_string(m.n_dims));
    all.data.insert(all.data.end(), m.data.begin(), m.data.end());
    all.n_frames += m.n_frames;
  }
  return all;
}

std::optional<dsu::PipelineConfig> maybe_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return dsu::load_pipeline_config(path);
}

std::string fmt_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// fbank

struct FbankArgs {
  CLI::App* sub = nullptr;
  std::string in, out, config;
  std::uint32_t sample_rate = 16000;
  double frame_length_ms = 25.0, frame_shift_ms = 10.0;
  std::size_t n_fft = 512, n_mels = 80;
  double f_min = 0.0, f_max = -1.0, log_floor = 1e-10;
};

dsu::FbankConfig effective_fbank(const FbankArgs& a,
                                 const std::optional<dsu::PipelineConfig>& c) {
  dsu::FbankConfig cfg;
  if (c) cfg = c->fbank;
  if (a.sub->count("--sample-rate")) cfg.sample_rate = a.sample_rate;
  if (a.sub->count("--frame-length-ms"))
    cfg.frame_length_ms = a.frame_length_ms;
  if (a.sub->count("--frame-shift-ms")) cfg.frame_shift_ms = a.frame_shift_ms;
  if (a.sub->count("--n-fft")) cfg.n_fft = a.n_fft;
  if (a.sub->count("--n-mels")) cfg.n_mels = a.n_mels;
  if (a.sub->count("--f-min")) cfg.f_min = a.f_min;
  if (a.sub->count("--f-max")) cfg.f_max = a.f_max;
  if (a.sub->count("--log-floor")) cfg.log_floor = a.log_floor;
  return cfg;
}

void run_fbank(const FbankArgs& a) {
  dsu::FbankConfig cfg = effective_fbank(a, maybe_config(a.config));
  dsu::Waveform wav = dsu::load_wav(a.in);
  dsu::FeatureMatrix m = dsu::compute_fbank(wav, cfg);
  dsu::save_features(a.out, m);
  log_info("fbank: " + std::to_string(m.n_frames) + "x" +
           std::to_string(m.n_dims) + " frames from " + a.in);
}

// ---------------------------------------------------------------------------
// kmeans-train

struct KmeansTrainArgs {
  CLI::App* sub = nullptr;
  std::vector<std::string> in;
  std::string list, out, config;
  std::uint32_t k = 0;
  std::size_t max_iters = 100;
  double tol = 1e-4;
  std::uint64_t seed = 0;
  std::string init = "kmeans++";
  std::string batch_size = "full";
};

void run_kmeans_train(const KmeansTrainArgs& a) {
  auto c = maybe_config(a.config);
  dsu::KmeansConfig cfg;
  if (c) cfg = c->kmeans;
  bool have_k = (c && c->has_kmeans_k);
  if (a.sub->count("--k")) {
    cfg.k = a.k;
    have_k = true;
  }
  if (!have_k) throw dsu::ConfigError("k is required: pass --k or kmeans.k");
  if (a.sub->count("--max-iters")) cfg.max_iters = a.max_iters;
  if (a.sub->count("--tol")) cfg.tol = a.tol;
  if (a.sub->count("--init")) {
    if (a.init == "kmeans++") cfg.init = dsu::KmeansInit::kPlusPlus;
    else if (a.init == "random") cfg.init = dsu::KmeansInit::kRandom;
    else
      throw dsu::ConfigError("--init must be kmeans++ or random, got '" +
                             a.init + "'");
  }
  if (a.sub->count("--batch-size")) {
    if (a.batch_size == "full") cfg.batch_size = 0;
    else cfg.batch_size = std::stoull(a.batch_size);
  }
  std::uint64_t top_seed = a.sub->count("--seed") ? a.seed
                           : c                    ? c->seed
                                                  : 0;
  cfg.seed = dsu::derive_stream_seed(top_seed, kKmeansStream);

  std::vector<dsu::FeatureMatrix> mats;
  for (const fs::path& p : gather_inputs(a.in, a.list))
    mats.push_back(dsu::load_features(p));
  dsu::FeatureMatrix all = concat_features(mats);
  log_info("kmeans-train: " + std::to_string(all.n_frames) + " frames, k=" +
           std::to_string(cfg.k));
  dsu::Codebook cb = dsu::kmeans_fit(all, cfg);
  dsu::save_codebook(a.out, cb);
  log_info("kmeans-train: " + std::to_string(cb.iterations) +
           " passes, inertia " + fmt_score(cb.inertia));
}

// ---------------------------------------------------------------------------
// quantize

struct QuantizeArgs {
  std::vector<std::string> in;
  std::string list, codebook, out;
};

void run_quantize(const QuantizeArgs& a) {
  dsu::Codebook cb = dsu::load_codebook(a.codebook);
  dsu::UnitCorpus corpus;
  for (const fs::path& p : gather_inputs(a.in, a.list)) {
    dsu::FeatureMatrix m = dsu::load_features(p);
    dsu::UnitSequence s = dsu::assign(cb, m);
    s.source_id = p.stem().string();
    corpus.push_back(std::move(s));
  }
  dsu::save_unit_corpus(a.out, corpus);
  log_info("quantize: " + std::to_string(corpus.size()) + " sequences -> " +
           a.out);
}

// ---------------------------------------------------------------------------
// dedup

struct DedupArgs {
  std::string in, out;
};

void run_dedup(const DedupArgs& a) {
  dsu::UnitCorpus corpus = dsu::load_unit_corpus(a.in, dsu::Stage::kRaw);
  dsu::UnitCorpus out;
  out.reserve(corpus.size());
  for (const dsu::UnitSequence& s : corpus)
    out.push_back(dsu::deduplicate(s));
  dsu::save_unit_corpus(a.out, out);
  log_info("dedup: " + std::to_string(out.size()) + " sequences -> " + a.out);
}

// ---------------------------------------------------------------------------
// mask

struct MaskArgs {
  CLI::App* sub = nullptr;
  std::string in, out, config;
  std::size_t n_masks = 0, max_width = 0;
  std::uint64_t seed = 0;
  std::uint32_t vocab = 0;
};

void run_mask(const MaskArgs& a) {
  auto c = maybe_config(a.config);
  std::uint32_t vocab = 0;
  if (a.sub->count("--vocab")) vocab = a.vocab;
  else if (c && c->has_kmeans_k) vocab = c->kmeans.k;
  else
    throw dsu::ConfigError(
        "the unit vocabulary is required: pass --vocab or kmeans.k");
  std::size_t n_masks = a.sub->count("--n-masks") ? a.n_masks
                        : c                       ? c->mask_n_masks
                                                  : 0;
  std::size_t max_width = a.sub->count("--max-width") ? a.max_width
                          : c                         ? c->mask_max_width
                                                      : 0;
  std::uint64_t top_seed = a.sub->count("--seed") ? a.seed
                           : c                    ? c->seed
                                                  : 0;
  std::uint64_t mask_seed = dsu::derive_stream_seed(top_seed, kMaskStream);

  dsu::UnitCorpus corpus =
      dsu::load_unit_corpus(a.in, dsu::Stage::kRaw, vocab);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    corpus[i] = dsu::time_mask(corpus[i], n_masks, max_width,
                               dsu::derive_stream_seed(mask_seed, i));
  dsu::save_unit_corpus(a.out, corpus);
  log_info("mask: " + std::to_string(n_masks) + " spans/sequence -> " +
           a.out);
}

// ---------------------------------------------------------------------------
// bpe-train / bpe-encode / bpe-decode

struct BpeTrainArgs {
  CLI::App* sub = nullptr;
  std::string in, out, config;
  std::uint32_t target_vocab = 0;
  std::uint32_t vocab = 0;
};

void run_bpe_train(const BpeTrainArgs& a) {
  auto c = maybe_config(a.config);
  std::optional<std::uint32_t> vocab;
  if (a.sub->count("--vocab")) vocab = a.vocab;
  else if (c && c->has_kmeans_k) vocab = c->kmeans.k;
  std::uint32_t target = 0;
  if (a.sub->count("--target-vocab")) target = a.target_vocab;
  else if (c && c->has_bpe_target) target = c->bpe_target_vocab;
  else
    throw dsu::ConfigError(
        "target vocabulary is required: pass --target-vocab or "
        "bpe.target_vocab");
  dsu::UnitCorpus corpus =
      dsu::load_unit_corpus(a.in, dsu::Stage::kDedup, vocab);
  dsu::BpeModel model = dsu::bpe_train(corpus, target);
  dsu::save_bpe_model(a.out, model);
  log_info("bpe-train: " + std::to_string(model.merges.size()) +
           " merges over base " + std::to_string(model.base_vocab) + " -> " +
           a.out);
}

struct BpeCodecArgs {
  std::string model, in, out;
};

void run_bpe_encode(const BpeCodecArgs& a) {
  dsu::BpeModel model = dsu::load_bpe_model(a.model);
  dsu::UnitCorpus corpus =
      dsu::load_unit_corpus(a.in, dsu::Stage::kDedup, model.base_vocab);
  dsu::UnitCorpus out;
  out.reserve(corpus.size());
  for (const dsu::UnitSequence& s : corpus)
    out.push_back(dsu::bpe_encode(model, s));
  dsu::save_unit_corpus(a.out, out);
  log_info("bpe-encode: " + std::to_string(out.size()) + " sequences -> " +
           a.out);
}

void run_bpe_decode(const BpeCodecArgs& a) {
  dsu::BpeModel model = dsu::load_bpe_model(a.model);
  dsu::UnitCorpus corpus =
      dsu::load_unit_corpus(a.in, dsu::Stage::kBpe, model.vocab_size());
  dsu::UnitCorpus out;
  out.reserve(corpus.size());
  for (const dsu::UnitSequence& s : corpus)
    out.push_back(dsu::bpe_decode(model, s));
  dsu::save_unit_corpus(a.out, out);
  log_info("bpe-decode: " + std::to_string(out.size()) + " sequences -> " +
           a.out);
}

// ---------------------------------------------------------------------------
// pack / unpack

struct PackArgs {
  CLI::App* sub = nullptr;
  std::string in, out;
  std::uint32_t vocab = 0;
};

void run_pack(const PackArgs& a) {
  std::optional<std::uint32_t> vocab;
  if (a.sub->count("--vocab")) vocab = a.vocab;
  dsu::UnitCorpus corpus =
      dsu::load_unit_corpus(a.in, dsu::Stage::kRaw, vocab);
  std::uint32_t v = corpus.empty() ? (vocab ? *vocab : 0)
                                   : corpus.front().vocab_size;
  dsu::pack_units(corpus, v, a.out);
  log_info("pack: vocab " + std::to_string(v) + ", " +
           std::to_string(dsu::bits_per_unit(v)) + " bits/unit -> " + a.out);
}

struct UnpackArgs {
  std::string in, out;
};

void run_unpack(const UnpackArgs& a) {
  dsu::UnitCorpus corpus = dsu::unpack_units(a.in);
  dsu::save_unit_corpus(a.out, corpus);
  log_info("unpack: " + std::to_string(corpus.size()) + " sequences -> " +
           a.out);
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  CLI::App* sub = nullptr;
  std::string raw, dedup, bpe, targets, subsample = "conv1d2", out, config;
};

void run_stats(const StatsArgs& a) {
  auto c = maybe_config(a.config);
  dsu::SubsampleKind kind = c ? c->subsample : dsu::SubsampleKind::kConv1d2;
  if (a.sub->count("--subsample")) kind = dsu::parse_subsample_kind(a.subsample);
  std::string targets_path = a.targets;
  if (targets_path.empty() && c && c->has_targets)
    targets_path = c->targets.string();

  dsu::UnitCorpus raw = dsu::load_unit_corpus(a.raw, dsu::Stage::kRaw);
  dsu::UnitCorpus dedup = dsu::load_unit_corpus(a.dedup, dsu::Stage::kDedup);
  dsu::UnitCorpus bpe = dsu::load_unit_corpus(a.bpe, dsu::Stage::kBpe);
  std::optional<dsu::UnitCorpus> targets;
  if (!targets_path.empty())
    targets = dsu::load_unit_corpus(targets_path, dsu::Stage::kRaw);

  dsu::CorpusStats st = dsu::corpus_stats(raw, dedup, bpe, kind, targets);
  std::cout << dsu::format_stats_table(st) << "\n"
            << dsu::format_stats_kv(st);
  if (!a.out.empty()) dsu::detail::write_file(a.out, dsu::format_stats_kv(st));
}

// ---------------------------------------------------------------------------
// ctc-check

struct CtcCheckArgs {
  CLI::App* sub = nullptr;
  std::string in, targets, subsample = "conv1d2", config;
  bool strict = false;
};

void run_ctc_check(const CtcCheckArgs& a) {
  auto c = maybe_config(a.config);
  dsu::SubsampleKind kind = c ? c->subsample : dsu::SubsampleKind::kConv1d2;
  if (a.sub->count("--subsample")) kind = dsu::parse_subsample_kind(a.subsample);

  dsu::UnitCorpus inputs = dsu::load_unit_corpus(a.in, dsu::Stage::kRaw);
  dsu::UnitCorpus targets =
      dsu::load_unit_corpus(a.targets, dsu::Stage::kRaw);
  if (inputs.size() != targets.size())
    throw dsu::ValueError("input and target corpora are not index-aligned");
  std::vector<std::pair<std::size_t, std::size_t>> pairs(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::size_t tlen = a.strict
                           ? dsu::ctc_effective_target_length(targets[i])
                           : targets[i].units.size();
    pairs[i] = {inputs[i].units.size(), tlen};
  }
  dsu::CtcReport rep = dsu::ctc_feasibility(pairs, kind);
  std::cout << "ctc.kind=" << dsu::subsample_name(kind) << "\n"
            << "ctc.n_pairs=" << rep.n_pairs << "\n"
            << "ctc.violations=" << rep.violations << "\n"
            << "ctc.violation_rate=" << fmt_score(rep.violation_rate) << "\n";
  if (rep.recommended)
    std::cout << "ctc.recommended=" << dsu::subsample_name(*rep.recommended)
              << "\n";
}

// ---------------------------------------------------------------------------
// cca-select

struct CcaSelectArgs {
  std::string labels;
  std::vector<std::string> layers;
  double reg_eps = 1e-6;
};

void run_cca_select(const CcaSelectArgs& a) {
  dsu::FeatureMatrix labels =
      dsu::load_features(a.labels, dsu::FeatureFormat::kDsf);
  std::vector<std::pair<std::int64_t, double>> scores;
  for (const std::string& layer_arg : a.layers) {
    std::size_t eq = layer_arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == layer_arg.size())
      throw dsu::ConfigError("--layer needs the form ID=PATH, got '" +
                             layer_arg + "'");
    std::int64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(layer_arg.substr(0, eq), &used);
      if (used != eq) throw dsu::ConfigError("");
    } catch (const std::exception&) {
      throw dsu::ConfigError("bad layer ID in '" + layer_arg + "'");
    }
    dsu::FeatureMatrix x =
        dsu::load_features(layer_arg.substr(eq + 1), dsu::FeatureFormat::kDsf);
    scores.emplace_back(id, dsu::cca_score(x, labels, a.reg_eps));
  }
  for (const auto& [id, score] : scores)
    std::cout << id << " " << fmt_score(score) << "\n";
  std::cout << "selected=" << dsu::select_layer(scores) << "\n";
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineArgs {
  CLI::App* sub = nullptr;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

void run_pipeline(const PipelineArgs& a) {
  dsu::PipelineConfig cfg = dsu::load_pipeline_config(a.config);
  dsu::require_pipeline_keys(cfg);
  if (a.sub->count("--seed")) cfg.seed = a.seed;
  if (a.sub->count("--workers")) cfg.workers = a.workers;
  log_info("pipeline: seed " + std::to_string(cfg.seed) + ", workers " +
           std::to_string(cfg.workers));

  fs::create_directories(cfg.out_dir);

  // Stage 1: features. Either extract FBANKs from the listed WAVs into the
  // output tree, or read precomputed matrices. Artifact paths are stored
  // relative to the output directory so reruns into different directories
  // stay byte-identical.
  std::vector<dsu::FeatureMatrix> feats;
  std::vector<std::string> stems;
  if (cfg.has_wav_list) {
    std::vector<fs::path> wavs = read_path_list(cfg.wav_list);
    fs::create_directories(cfg.out_dir / "features");
    std::string list_text;
    for (std::size_t i = 0; i < wavs.size(); ++i) {
      dsu::Waveform wav = dsu::load_wav(wavs[i]);
      dsu::FeatureMatrix m = dsu::compute_fbank(wav, cfg.fbank);
      char prefix[16];
      std::snprintf(prefix, sizeof(prefix), "%04zu_", i);
      std::string name = prefix + wavs[i].stem().string() + ".dsf";
      dsu::save_features(cfg.out_dir / "features" / name, m);
      list_text += "features/" + name + "\n";
      stems.push_back(prefix + wavs[i].stem().string());
      feats.push_back(std::move(m));
      log_debug("fbank " + wavs[i].string() + " -> features/" + name);
    }
    dsu::detail::write_file(cfg.out_dir / "features.list", list_text);
    log_info("pipeline: extracted " + std::to_string(feats.size()) +
             " feature files");
  } else {
    for (const fs::path& p : read_path_list(cfg.features_list)) {
      feats.push_back(dsu::load_features(p));
      stems.push_back(p.stem().string());
    }
    log_info("pipeline: loaded " + std::to_string(feats.size()) +
             " feature files");
  }

  // Stage 2: codebook.
  dsu::KmeansConfig kc = cfg.kmeans;
  kc.seed = dsu::derive_stream_seed(cfg.seed, kKmeansStream);
  dsu::Codebook cb = dsu::kmeans_fit(concat_features(feats), kc);
  dsu::save_codebook(cfg.out_dir / "codebook.dsf", cb);
  log_info("pipeline: codebook k=" + std::to_string(cb.k) + ", " +
           std::to_string(cb.iterations) + " passes, inertia " +
           fmt_score(cb.inertia));

  // Stage 3: quantize.
  dsu::UnitCorpus raw;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    dsu::UnitSequence s = dsu::assign(cb, feats[i]);
    s.source_id = stems[i];
    raw.push_back(std::move(s));
  }
  dsu::save_unit_corpus(cfg.out_dir / "units.raw.txt", raw);

  // Stage 4: optional masking, then de-duplication.
  dsu::UnitCorpus working = raw;
  if (cfg.mask_n_masks > 0) {
    std::uint64_t mask_seed = dsu::derive_stream_seed(cfg.seed, kMaskStream);
    for (std::size_t i = 0; i < working.size(); ++i)
      working[i] =
          dsu::time_mask(working[i], cfg.mask_n_masks, cfg.mask_max_width,
                         dsu::derive_stream_seed(mask_seed, i));
    dsu::save_unit_corpus(cfg.out_dir / "units.masked.txt", working);
    log_info("pipeline: masked " + std::to_string(cfg.mask_n_masks) +
             " spans/sequence");
  }
  dsu::UnitCorpus dedup;
  dedup.reserve(working.size());
  for (const dsu::UnitSequence& s : working)
    dedup.push_back(dsu::deduplicate(s));
  dsu::save_unit_corpus(cfg.out_dir / "units.dedup.txt", dedup);

  // Stage 5: subword model.
  dsu::BpeModel model = dsu::bpe_train(dedup, cfg.bpe_target_vocab);
  dsu::save_bpe_model(cfg.out_dir / "bpe.model", model);
  log_info("pipeline: " + std::to_string(model.merges.size()) +
           " merges over base " + std::to_string(model.base_vocab));
  dsu::UnitCorpus encoded;
  encoded.reserve(dedup.size());
  for (const dsu::UnitSequence& s : dedup)
    encoded.push_back(dsu::bpe_encode(model, s));
  dsu::save_unit_corpus(cfg.out_dir / "units.bpe.txt", encoded);

  // Stage 6: packed storage.
  dsu::pack_units(encoded, model.vocab_size(), cfg.out_dir / "units.dsu");

  // Stage 7: length accounting.
  std::optional<dsu::UnitCorpus> targets;
  if (cfg.has_targets)
    targets = dsu::load_unit_corpus(cfg.targets, dsu::Stage::kRaw);
  dsu::CorpusStats st =
      dsu::corpus_stats(raw, dedup, encoded, cfg.subsample, targets);
  dsu::detail::write_file(cfg.out_dir / "stats.txt",
                          dsu::format_stats_table(st));
  dsu::detail::write_file(cfg.out_dir / "stats.kv", dsu::format_stats_kv(st));
  log_info("pipeline: reduction " + std::to_string(st.reduction_percent) +
           "%, artifacts in " + cfg.out_dir.string());
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{
      "dsu: discrete speech unit toolkit (feature extraction, K-means "
      "quantization, de-duplication, masking, subword merging, bit-packed "
      "storage, and length/feasibility reports)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dsu 1.0.0");

  auto fb = std::make_shared<FbankArgs>();
  fb->sub = app.add_subcommand("fbank",
                               "Extract log mel filterbank features from a "
                               "16-bit mono WAV into a DSF matrix");
  fb->sub->add_option("--in", fb->in, "input WAV file")->required();
  fb->sub->add_option("--out", fb->out, "output DSF file")->required();
  fb->sub->add_option("--config", fb->config, "key=value manifest");
  fb->sub->add_option("--sample-rate", fb->sample_rate, "expected rate (Hz)");
  fb->sub->add_option("--frame-length-ms", fb->frame_length_ms,
                      "window length (ms)");
  fb->sub->add_option("--frame-shift-ms", fb->frame_shift_ms,
                      "window shift (ms)");
  fb->sub->add_option("--n-fft", fb->n_fft, "FFT size (power of two)");
  fb->sub->add_option("--n-mels", fb->n_mels, "number of mel filters");
  fb->sub->add_option("--f-min", fb->f_min, "lowest filter edge (Hz)");
  fb->sub->add_option("--f-max", fb->f_max,
                      "highest filter edge (Hz), -1 for Nyquist");
  fb->sub->add_option("--log-floor", fb->log_floor, "energy floor before log");
  fb->sub->callback([fb]() { run_fbank(*fb); });

  auto kt = std::make_shared<KmeansTrainArgs>();
  kt->sub = app.add_subcommand(
      "kmeans-train", "Fit a K-means codebook over feature matrices");
  kt->sub->add_option("--in", kt->in, "feature file (repeatable)");
  kt->sub->add_option("--list", kt->list, "file listing feature paths");
  kt->sub->add_option("--out", kt->out, "output codebook DSF")->required();
  kt->sub->add_option("--config", kt->config, "key=value manifest");
  kt->sub->add_option("--k", kt->k, "number of clusters");
  kt->sub->add_option("--max-iters", kt->max_iters, "iteration budget");
  kt->sub->add_option("--tol", kt->tol, "relative inertia tolerance");
  kt->sub->add_option("--seed", kt->seed, "top-level seed");
  kt->sub->add_option("--init", kt->init, "kmeans++ or random");
  kt->sub->add_option("--batch-size", kt->batch_size,
                      "mini-batch size, or 'full'");
  kt->sub->callback([kt]() { run_kmeans_train(*kt); });

  auto qz = std::make_shared<QuantizeArgs>();
  CLI::App* qz_sub = app.add_subcommand(
      "quantize", "Map each feature file to its nearest-centroid unit IDs");
  qz_sub->add_option("--codebook", qz->codebook, "codebook DSF")->required();
  qz_sub->add_option("--in", qz->in, "feature file (repeatable)");
  qz_sub->add_option("--list", qz->list, "file listing feature paths");
  qz_sub->add_option("--out", qz->out, "output unit text file")->required();
  qz_sub->callback([qz]() { run_quantize(*qz); });

  auto dd = std::make_shared<DedupArgs>();
  CLI::App* dd_sub = app.add_subcommand(
      "dedup", "Collapse consecutive repeated units in each sequence");
  dd_sub->add_option("--in", dd->in, "raw unit text file")->required();
  dd_sub->add_option("--out", dd->out, "output unit text file")->required();
  dd_sub->callback([dd]() { run_dedup(*dd); });

  auto mk = std::make_shared<MaskArgs>();
  mk->sub = app.add_subcommand(
      "mask", "Overwrite random spans with the reserved mask unit");
  mk->sub->add_option("--in", mk->in, "unit text file")->required();
  mk->sub->add_option("--out", mk->out, "output unit text file")->required();
  mk->sub->add_option("--config", mk->config, "key=value manifest");
  mk->sub->add_option("--n-masks", mk->n_masks, "spans per sequence");
  mk->sub->add_option("--max-width", mk->max_width, "widest span");
  mk->sub->add_option("--seed", mk->seed, "top-level seed");
  mk->sub->add_option("--vocab", mk->vocab,
                      "unit vocabulary (mask ID = vocab)");
  mk->sub->callback([mk]() { run_mask(*mk); });

  auto bt = std::make_shared<BpeTrainArgs>();
  bt->sub = app.add_subcommand(
      "bpe-train", "Learn pair merges over a de-duplicated unit corpus");
  bt->sub->add_option("--in", bt->in, "dedup unit text file")->required();
  bt->sub->add_option("--out", bt->out, "output model file")->required();
  bt->sub->add_option("--config", bt->config, "key=value manifest");
  bt->sub->add_option("--target-vocab", bt->target_vocab,
                      "merged vocabulary size to reach");
  bt->sub->add_option("--vocab", bt->vocab, "base unit vocabulary");
  bt->sub->callback([bt]() { run_bpe_train(*bt); });

  auto be = std::make_shared<BpeCodecArgs>();
  CLI::App* be_sub = app.add_subcommand(
      "bpe-encode", "Apply trained merges to a de-duplicated corpus");
  be_sub->add_option("--model", be->model, "model file")->required();
  be_sub->add_option("--in", be->in, "dedup unit text file")->required();
  be_sub->add_option("--out", be->out, "output unit text file")->required();
  be_sub->callback([be]() { run_bpe_encode(*be); });

  auto bd = std::make_shared<BpeCodecArgs>();
  CLI::App* bd_sub = app.add_subcommand(
      "bpe-decode", "Expand metatokens back to base units");
  bd_sub->add_option("--model", bd->model, "model file")->required();
  bd_sub->add_option("--in", bd->in, "encoded unit text file")->required();
  bd_sub->add_option("--out", bd->out, "output unit text file")->required();
  bd_sub->callback([bd]() { run_bpe_decode(*bd); });

  auto pk = std::make_shared<PackArgs>();
  pk->sub = app.add_subcommand(
      "pack", "Store a unit corpus as fixed-width bit-packed binary");
  pk->sub->add_option("--in", pk->in, "unit text file")->required();
  pk->sub->add_option("--out", pk->out, "output packed file")->required();
  pk->sub->add_option("--vocab", pk->vocab,
                      "vocabulary size (default: max unit + 1)");
  pk->sub->callback([pk]() { run_pack(*pk); });

  auto up = std::make_shared<UnpackArgs>();
  CLI::App* up_sub = app.add_subcommand(
      "unpack", "Recover unit text from a bit-packed file");
  up_sub->add_option("--in", up->in, "packed file")->required();
  up_sub->add_option("--out", up->out, "output unit text file")->required();
  up_sub->callback([up]() { run_unpack(*up); });

  auto st = std::make_shared<StatsArgs>();
  st->sub = app.add_subcommand(
      "stats", "Report stage lengths, reduction ratio, and CTC feasibility");
  st->sub->add_option("--raw", st->raw, "raw unit text file")->required();
  st->sub->add_option("--dedup", st->dedup, "dedup unit text file")
      ->required();
  st->sub->add_option("--bpe", st->bpe, "encoded unit text file")->required();
  st->sub->add_option("--targets", st->targets, "target token text file");
  st->sub->add_option("--subsample", st->subsample,
                      "linear, conv1d1, conv1d2, or conv1d3");
  st->sub->add_option("--out", st->out, "also write key=value report here");
  st->sub->add_option("--config", st->config, "key=value manifest");
  st->sub->callback([st]() { run_stats(*st); });

  auto cc = std::make_shared<CtcCheckArgs>();
  cc->sub = app.add_subcommand(
      "ctc-check", "Check the CTC length constraint for a front-end choice");
  cc->sub->add_option("--in", cc->in, "encoder input unit text file")
      ->required();
  cc->sub->add_option("--targets", cc->targets, "target token text file")
      ->required();
  cc->sub->add_option("--subsample", cc->subsample,
                      "linear, conv1d1, conv1d2, or conv1d3");
  cc->sub->add_flag("--strict", cc->strict,
                    "count repeated target labels against the budget");
  cc->sub->add_option("--config", cc->config, "key=value manifest");
  cc->sub->callback([cc]() { run_ctc_check(*cc); });

  auto cs = std::make_shared<CcaSelectArgs>();
  CLI::App* cs_sub = app.add_subcommand(
      "cca-select",
      "Score layers against labels by canonical correlation and pick one");
  cs_sub->add_option("--labels", cs->labels, "label matrix DSF")->required();
  cs_sub
      ->add_option("--layer", cs->layers,
                   "ID=PATH layer matrix (repeatable)")
      ->required();
  cs_sub->add_option("--reg-eps", cs->reg_eps, "covariance regularizer");
  cs_sub->callback([cs]() { run_cca_select(*cs); });

  auto pl = std::make_shared<PipelineArgs>();
  pl->sub = app.add_subcommand(
      "pipeline",
      "Run features -> codebook -> units -> dedup -> merges -> pack -> "
      "stats from one manifest");
  pl->sub->add_option("--config", pl->config, "key=value manifest")
      ->required();
  pl->sub->add_option("--seed", pl->seed, "override the manifest seed");
  pl->sub->add_option("--workers", pl->workers,
                      "override the manifest worker count");
  pl->sub->callback([pl]() { run_pipeline(*pl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "dsu: " << e.what() << "\n";
    return 1;
  } catch (const dsu::Error& e) {
    std::cerr << "dsu: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dsu: internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
