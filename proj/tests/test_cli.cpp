// tests/test_cli.cpp

// Copyright 2026  dsu authors

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

// End-to-end tests of the command-line binary: exit codes, subcommand
// wiring against the library, seed-stream derivation, and byte-identical
// pipeline reruns. The binary path arrives through DSU_BIN.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "dsu/dsu.hpp"
#include "support/testutil.hpp"

namespace {

using testutil::RunResult;
using testutil::TempDir;
using testutil::run_cli;

// Feature file whose rows are copies of 4-dim archetype vectors. `runs`
// lists (archetype, repeat) pairs, so clustering with k = #archetypes
// recovers the archetypes exactly and quantization yields known runs.
dsu::FeatureMatrix archetype_features(
    const std::vector<std::pair<int, int>>& runs) {
  static const float kArchetypes[4][4] = {{0.f, 0.f, 0.f, 0.f},
                                          {1.f, 1.f, 1.f, 1.f},
                                          {2.f, 2.f, 2.f, 2.f},
                                          {3.f, 3.f, 3.f, 3.f}};
  dsu::FeatureMatrix m;
  m.n_dims = 4;
  for (const auto& [arch, count] : runs) {
    for (int r = 0; r < count; ++r) {
      ++m.n_frames;
      for (int d = 0; d < 4; ++d) m.data.push_back(kArchetypes[arch][d]);
    }
  }
  return m;
}

std::vector<std::int16_t> sine_samples(std::size_t n, double freq_hz,
                                       double rate_hz, double amplitude) {
  std::vector<std::int16_t> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = static_cast<std::int16_t>(std::lround(
        amplitude * std::sin(2.0 * M_PI * freq_hz * i / rate_hz)));
  return s;
}

std::string path_str(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST_CASE("version and help exit cleanly", "[cli]") {
  TempDir tmp;
  RunResult v = run_cli({"--version"}, tmp.path());
  CHECK(v.exit_code == 0);
  CHECK(v.out.find("dsu 1.0.0") != std::string::npos);
  CHECK(v.err.empty());

  RunResult h = run_cli({"--help"}, tmp.path());
  CHECK(h.exit_code == 0);
  CHECK(h.out.find("pipeline") != std::string::npos);
  CHECK(h.out.find("kmeans-train") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with a dsu-prefixed message", "[cli]") {
  TempDir tmp;

  RunResult unknown = run_cli({"frobnicate"}, tmp.path());
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.err.rfind("dsu: ", 0) == 0);

  RunResult missing = run_cli({"dedup"}, tmp.path());
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.rfind("dsu: ", 0) == 0);

  RunResult none = run_cli({}, tmp.path());
  CHECK(none.exit_code == 1);
}

TEST_CASE("data and config errors exit 2", "[cli]") {
  TempDir tmp;

  RunResult gone = run_cli({"dedup", "--in", path_str(tmp / "nope.txt"),
                            "--out", path_str(tmp / "out.txt")},
                           tmp.path());
  CHECK(gone.exit_code == 2);
  CHECK(gone.err.rfind("dsu: error: ", 0) == 0);

  testutil::write_bytes(tmp / "bad.cfg", "bogus.key = 1\n");
  RunResult badcfg =
      run_cli({"pipeline", "--config", path_str(tmp / "bad.cfg")}, tmp.path());
  CHECK(badcfg.exit_code == 2);
  CHECK(badcfg.err.rfind("dsu: error: ", 0) == 0);

  testutil::write_bytes(tmp / "trunc.dsf", "DS");
  RunResult trunc =
      run_cli({"quantize", "--codebook", path_str(tmp / "trunc.dsf"), "--in",
               path_str(tmp / "trunc.dsf"), "--out", path_str(tmp / "o.txt")},
              tmp.path());
  CHECK(trunc.exit_code == 2);
  CHECK(trunc.err.rfind("dsu: error: ", 0) == 0);
}

TEST_CASE("fbank subcommand matches the library", "[cli]") {
  TempDir tmp;
  testutil::write_wav(tmp / "tone.wav", 16000,
                      sine_samples(16000, 1000.0, 16000.0, 8000.0));

  RunResult r = run_cli({"fbank", "--in", path_str(tmp / "tone.wav"), "--out",
                         path_str(tmp / "tone.dsf"), "--n-mels", "40"},
                        tmp.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.err.empty());

  dsu::Waveform wav = dsu::load_wav(tmp / "tone.wav");
  dsu::FbankConfig cfg;
  cfg.n_mels = 40;
  dsu::FeatureMatrix expect = dsu::compute_fbank(wav, cfg);
  dsu::save_features(tmp / "expect.dsf", expect);
  CHECK(testutil::files_equal(tmp / "tone.dsf", tmp / "expect.dsf"));
}

TEST_CASE("kmeans-train, quantize, and dedup chain together", "[cli]") {
  TempDir tmp;
  dsu::save_features(tmp / "a.dsf",
                     archetype_features({{0, 3}, {1, 2}, {0, 1}}));
  dsu::save_features(tmp / "b.dsf",
                     archetype_features({{1, 2}, {2, 3}, {3, 1}}));
  dsu::save_features(tmp / "c.dsf",
                     archetype_features({{3, 2}, {0, 1}, {2, 2}}));
  testutil::write_bytes(tmp / "feats.list", "a.dsf\nb.dsf\nc.dsf\n");

  RunResult train =
      run_cli({"kmeans-train", "--list", path_str(tmp / "feats.list"), "--out",
               path_str(tmp / "cb.dsf"), "--k", "4", "--seed", "42",
               "--max-iters", "20"},
              tmp.path());
  REQUIRE(train.exit_code == 0);
  REQUIRE(std::filesystem::exists(tmp / "cb.dsf"));
  REQUIRE(std::filesystem::exists(tmp / "cb.dsf.meta"));

  RunResult quant =
      run_cli({"quantize", "--codebook", path_str(tmp / "cb.dsf"), "--list",
               path_str(tmp / "feats.list"), "--out",
               path_str(tmp / "units.txt")},
              tmp.path());
  REQUIRE(quant.exit_code == 0);

  // The CLI output must equal assigning each matrix against the saved
  // codebook in-process, with source ids taken from the file stems.
  dsu::Codebook cb = dsu::load_codebook(tmp / "cb.dsf");
  dsu::UnitCorpus expect;
  for (const std::string& stem : {"a", "b", "c"}) {
    dsu::UnitSequence s =
        dsu::assign(cb, dsu::load_features(tmp / (stem + ".dsf")));
    s.source_id = stem;
    expect.push_back(std::move(s));
  }
  CHECK(testutil::read_bytes(tmp / "units.txt") == dsu::format_units(expect));

  // Every run of equal archetype rows collapses under dedup.
  RunResult dd = run_cli({"dedup", "--in", path_str(tmp / "units.txt"),
                          "--out", path_str(tmp / "dedup.txt")},
                         tmp.path());
  REQUIRE(dd.exit_code == 0);
  dsu::UnitCorpus dedup_expect;
  for (const dsu::UnitSequence& s : expect)
    dedup_expect.push_back(dsu::deduplicate(s));
  CHECK(testutil::read_bytes(tmp / "dedup.txt") ==
        dsu::format_units(dedup_expect));
  REQUIRE(dedup_expect.size() == 3);
  CHECK(dedup_expect[0].units.size() == 3);
  CHECK(dedup_expect[1].units.size() == 3);
  CHECK(dedup_expect[2].units.size() == 3);
}

TEST_CASE("mask subcommand derives per-sequence streams from the seed",
          "[cli]") {
  TempDir tmp;
  dsu::UnitCorpus corpus;
  for (std::size_t i = 0; i < 3; ++i) {
    dsu::UnitSequence s;
    s.vocab_size = 100;
    s.source_id = "seq" + std::to_string(i);
    for (std::uint32_t u = 0; u < 100; ++u) s.units.push_back(u % 100);
    corpus.push_back(std::move(s));
  }
  dsu::save_unit_corpus(tmp / "in.txt", corpus);

  RunResult r =
      run_cli({"mask", "--in", path_str(tmp / "in.txt"), "--out",
               path_str(tmp / "out.txt"), "--n-masks", "2", "--max-width",
               "10", "--seed", "42", "--vocab", "100"},
              tmp.path());
  REQUIRE(r.exit_code == 0);

  // Sequence i must replay time_mask under the i-th stream of the mask
  // stream of the top-level seed.
  std::uint64_t mask_seed = dsu::derive_stream_seed(42, 1);
  dsu::UnitCorpus expect;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    expect.push_back(dsu::time_mask(corpus[i], 2, 10,
                                    dsu::derive_stream_seed(mask_seed, i)));
  CHECK(testutil::read_bytes(tmp / "out.txt") == dsu::format_units(expect));

  // The masked file really contains the reserved symbol.
  dsu::UnitCorpus parsed =
      dsu::load_unit_corpus(tmp / "out.txt", dsu::Stage::kRaw, 101);
  bool any_mask = false;
  for (const auto& s : parsed)
    for (std::uint32_t u : s.units) any_mask |= (u == 100);
  CHECK(any_mask);
}

TEST_CASE("bpe subcommands roundtrip through model files", "[cli]") {
  TempDir tmp;
  std::string corpus_text =
      "a\t1 2 1 2 3\n"
      "b\t1 2 1 2 1 2\n"
      "c\t3 1 2 3\n";
  testutil::write_bytes(tmp / "corpus.txt", corpus_text);

  RunResult train = run_cli({"bpe-train", "--in", path_str(tmp / "corpus.txt"),
                             "--out", path_str(tmp / "model.txt"),
                             "--target-vocab", "6", "--vocab", "4"},
                            tmp.path());
  REQUIRE(train.exit_code == 0);

  dsu::BpeModel model = dsu::load_bpe_model(tmp / "model.txt");
  CHECK(model.base_vocab == 4);
  CHECK(model.target_vocab == 6);
  CHECK(model.merges.size() == 2);
  CHECK(model.merges[0].left == 1);
  CHECK(model.merges[0].right == 2);

  RunResult enc = run_cli({"bpe-encode", "--model", path_str(tmp / "model.txt"),
                           "--in", path_str(tmp / "corpus.txt"), "--out",
                           path_str(tmp / "enc.txt")},
                          tmp.path());
  REQUIRE(enc.exit_code == 0);

  RunResult dec = run_cli({"bpe-decode", "--model", path_str(tmp / "model.txt"),
                           "--in", path_str(tmp / "enc.txt"), "--out",
                           path_str(tmp / "dec.txt")},
                          tmp.path());
  REQUIRE(dec.exit_code == 0);

  // Decoding the encoding restores the original unit lines.
  dsu::UnitCorpus orig =
      dsu::load_unit_corpus(tmp / "corpus.txt", dsu::Stage::kRaw, 4);
  dsu::UnitCorpus back =
      dsu::load_unit_corpus(tmp / "dec.txt", dsu::Stage::kRaw, 4);
  REQUIRE(back.size() == orig.size());
  for (std::size_t i = 0; i < orig.size(); ++i) {
    CHECK(back[i].units == orig[i].units);
    CHECK(back[i].source_id == orig[i].source_id);
  }

  // The encoded corpus is strictly shorter here: "1 2" dominates.
  dsu::UnitCorpus encd =
      dsu::load_unit_corpus(tmp / "enc.txt", dsu::Stage::kRaw, 6);
  std::size_t orig_total = 0, enc_total = 0;
  for (const auto& s : orig) orig_total += s.units.size();
  for (const auto& s : encd) enc_total += s.units.size();
  CHECK(enc_total < orig_total);
}

TEST_CASE("pack and unpack roundtrip through the binary container", "[cli]") {
  TempDir tmp;
  std::string text =
      "a\t3 1 2\n"
      "b\t0 0 1 3 2 2\n"
      "\n";
  testutil::write_bytes(tmp / "units.txt", text);

  RunResult pk = run_cli({"pack", "--in", path_str(tmp / "units.txt"), "--out",
                          path_str(tmp / "units.dsu"), "--vocab", "4"},
                         tmp.path());
  REQUIRE(pk.exit_code == 0);

  // Header carries the explicit vocabulary.
  std::string bytes = testutil::read_bytes(tmp / "units.dsu");
  REQUIRE(bytes.size() >= 19);
  CHECK(bytes.substr(0, 4) == "DSU1");
  std::uint32_t vocab = 0;
  for (int i = 0; i < 4; ++i)
    vocab |= static_cast<std::uint32_t>(
                 static_cast<unsigned char>(bytes[6 + i]))
             << (8 * i);
  CHECK(vocab == 4);
  CHECK(static_cast<unsigned char>(bytes[10]) == 2);  // bits per unit

  RunResult up = run_cli({"unpack", "--in", path_str(tmp / "units.dsu"),
                          "--out", path_str(tmp / "back.txt")},
                         tmp.path());
  REQUIRE(up.exit_code == 0);

  // Packing drops source ids; the unit payload survives exactly.
  dsu::UnitCorpus orig =
      dsu::load_unit_corpus(tmp / "units.txt", dsu::Stage::kRaw, 4);
  dsu::UnitCorpus back =
      dsu::load_unit_corpus(tmp / "back.txt", dsu::Stage::kRaw, 4);
  REQUIRE(back.size() == orig.size());
  for (std::size_t i = 0; i < orig.size(); ++i) {
    CHECK(back[i].units == orig[i].units);
    CHECK(back[i].source_id.empty());
  }
}

TEST_CASE("stats reports the reduction ratio as key=value lines", "[cli]") {
  TempDir tmp;
  // Single-sequence corpora with the lengths of a known table row.
  auto line_of = [](std::size_t n) {
    std::string s = "u\t";
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += std::to_string(i % 7);
    }
    return s + "\n";
  };
  testutil::write_bytes(tmp / "raw.txt", line_of(227));
  // De-duplicated corpora cannot repeat adjacently; i % 7 never does.
  testutil::write_bytes(tmp / "dedup.txt", line_of(172));
  testutil::write_bytes(tmp / "bpe.txt", line_of(98));

  RunResult r = run_cli({"stats", "--raw", path_str(tmp / "raw.txt"),
                         "--dedup", path_str(tmp / "dedup.txt"), "--bpe",
                         path_str(tmp / "bpe.txt"), "--out",
                         path_str(tmp / "stats.kv")},
                        tmp.path());
  REQUIRE(r.exit_code == 0);

  std::string kv = testutil::read_bytes(tmp / "stats.kv");
  CHECK(kv.find("avg_len_raw=227") != std::string::npos);
  CHECK(kv.find("avg_len_dedup=172") != std::string::npos);
  CHECK(kv.find("avg_len_bpe=98") != std::string::npos);
  CHECK(kv.find("reduction_ratio=57%") != std::string::npos);
  CHECK(kv.find("subsample.kind=conv1d2") != std::string::npos);

  // Standard output repeats the table and the same key=value block.
  CHECK(r.out.find("57%") != std::string::npos);
  CHECK(r.out.find(kv) != std::string::npos);
}

TEST_CASE("ctc-check prints feasibility counters", "[cli]") {
  TempDir tmp;
  auto seq_line = [](const std::string& id, std::size_t n) {
    std::string s = id + "\t";
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += std::to_string(i % 5);
    }
    return s + "\n";
  };
  testutil::write_bytes(tmp / "in.txt", seq_line("a", 178) + seq_line("b", 300));
  testutil::write_bytes(tmp / "tg.txt", seq_line("a", 106) + seq_line("b", 50));

  RunResult r = run_cli({"ctc-check", "--in", path_str(tmp / "in.txt"),
                         "--targets", path_str(tmp / "tg.txt")},
                        tmp.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("ctc.kind=conv1d2") != std::string::npos);
  CHECK(r.out.find("ctc.n_pairs=2") != std::string::npos);
  CHECK(r.out.find("ctc.violations=1") != std::string::npos);
  CHECK(r.out.find("ctc.violation_rate=0.5") != std::string::npos);
  CHECK(r.out.find("ctc.recommended=conv1d1") != std::string::npos);

  // Strict accounting adds repeat gaps to the target lengths. With
  // repeat-free targets it must agree with the plain run.
  RunResult strict = run_cli({"ctc-check", "--in", path_str(tmp / "in.txt"),
                              "--targets", path_str(tmp / "tg.txt"),
                              "--strict"},
                             tmp.path());
  REQUIRE(strict.exit_code == 0);
  CHECK(strict.out == r.out);

  // A repeat-heavy target raises the effective length and flips the
  // verdict for the pair under strict counting.
  std::string reps = "a\t";
  for (int i = 0; i < 60; ++i) reps += (i ? " 1" : "1");
  reps += "\n";
  testutil::write_bytes(tmp / "reps.txt", reps);
  testutil::write_bytes(tmp / "in1.txt", seq_line("a", 178));
  RunResult strict2 = run_cli({"ctc-check", "--in", path_str(tmp / "in1.txt"),
                               "--targets", path_str(tmp / "reps.txt"),
                               "--strict"},
                              tmp.path());
  REQUIRE(strict2.exit_code == 0);
  CHECK(strict2.out.find("ctc.violations=1") != std::string::npos);
}

TEST_CASE("cca-select ranks layers and prints the winner", "[cli]") {
  TempDir tmp;
  // Labels: 40x3 pseudo-random but fixed. Layer 7 is an invertible linear
  // map of the labels (score ~1); layer 3 is an unrelated pattern.
  dsu::FeatureMatrix labels;
  labels.n_frames = 40;
  labels.n_dims = 3;
  dsu::SplitMix64 rng(7);
  for (std::size_t i = 0; i < 120; ++i)
    labels.data.push_back(static_cast<float>(rng.uniform_double() - 0.5));

  dsu::FeatureMatrix good;
  good.n_frames = 40;
  good.n_dims = 3;
  good.data.resize(120);
  for (std::size_t r = 0; r < 40; ++r) {
    const float* x = labels.row(r);
    good.data[r * 3 + 0] = 2.0f * x[0] + 0.3f * x[1];
    good.data[r * 3 + 1] = x[1] - 0.5f * x[2];
    good.data[r * 3 + 2] = 0.7f * x[2] + 0.1f * x[0];
  }

  dsu::FeatureMatrix noise;
  noise.n_frames = 40;
  noise.n_dims = 3;
  dsu::SplitMix64 rng2(99);
  for (std::size_t i = 0; i < 120; ++i)
    noise.data.push_back(static_cast<float>(rng2.uniform_double() - 0.5));

  dsu::save_features(tmp / "labels.dsf", labels);
  dsu::save_features(tmp / "l3.dsf", noise);
  dsu::save_features(tmp / "l7.dsf", good);

  RunResult r = run_cli({"cca-select", "--labels", path_str(tmp / "labels.dsf"),
                         "--layer", "3=" + path_str(tmp / "l3.dsf"), "--layer",
                         "7=" + path_str(tmp / "l7.dsf")},
                        tmp.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("3 ") != std::string::npos);
  CHECK(r.out.find("7 ") != std::string::npos);
  CHECK(r.out.find("selected=7\n") != std::string::npos);

  RunResult bad = run_cli({"cca-select", "--labels",
                           path_str(tmp / "labels.dsf"), "--layer", "oops"},
                          tmp.path());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("pipeline reruns are byte-identical and match staged commands",
          "[cli]") {
  TempDir tmp;
  // Three feature files built from constant archetype rows so k=4
  // clustering is exact and the unit runs are predictable.
  dsu::save_features(tmp / "a.dsf",
                     archetype_features({{0, 6}, {1, 4}, {2, 2}, {0, 3}}));
  dsu::save_features(tmp / "b.dsf",
                     archetype_features({{3, 5}, {1, 3}, {3, 2}, {2, 4}}));
  dsu::save_features(tmp / "c.dsf",
                     archetype_features({{2, 4}, {0, 2}, {1, 5}, {3, 1}}));
  testutil::write_bytes(tmp / "feats.list", "a.dsf\nb.dsf\nc.dsf\n");

  auto manifest = [&](const std::string& out_dir) {
    return "seed = 42\n"
           "input.features_list = feats.list\n"
           "out.dir = " +
           out_dir +
           "\n"
           "kmeans.k = 4\n"
           "kmeans.max_iters = 20\n"
           "kmeans.tol = 1e-4\n"
           "bpe.target_vocab = 10\n";
  };
  testutil::write_bytes(tmp / "run1.cfg", manifest("out1"));
  testutil::write_bytes(tmp / "run2.cfg", manifest("out2"));

  RunResult r1 =
      run_cli({"pipeline", "--config", path_str(tmp / "run1.cfg")}, tmp.path());
  REQUIRE(r1.exit_code == 0);
  RunResult r2 =
      run_cli({"pipeline", "--config", path_str(tmp / "run2.cfg")}, tmp.path());
  REQUIRE(r2.exit_code == 0);

  // Same seed, same inputs: the whole artifact tree matches byte for byte.
  CHECK(testutil::trees_equal(tmp / "out1", tmp / "out2"));
  for (const char* name :
       {"codebook.dsf", "codebook.dsf.meta", "units.raw.txt",
        "units.dedup.txt", "bpe.model", "units.bpe.txt", "units.dsu",
        "stats.txt", "stats.kv"}) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(tmp / "out1" / name));
  }
  CHECK_FALSE(std::filesystem::exists(tmp / "out1" / "units.masked.txt"));

  // Running the stages by hand with the same top-level seed reproduces
  // every pipeline artifact exactly.
  std::filesystem::create_directories(tmp / "staged");
  auto staged = [&](const std::string& name) {
    return path_str(tmp / "staged" / name);
  };
  RunResult km =
      run_cli({"kmeans-train", "--list", path_str(tmp / "feats.list"), "--out",
               staged("codebook.dsf"), "--k", "4", "--seed", "42",
               "--max-iters", "20", "--tol", "1e-4"},
              tmp.path());
  REQUIRE(km.exit_code == 0);
  RunResult qz = run_cli({"quantize", "--codebook", staged("codebook.dsf"),
                          "--list", path_str(tmp / "feats.list"), "--out",
                          staged("units.raw.txt")},
                         tmp.path());
  REQUIRE(qz.exit_code == 0);
  RunResult dd = run_cli({"dedup", "--in", staged("units.raw.txt"), "--out",
                          staged("units.dedup.txt")},
                         tmp.path());
  REQUIRE(dd.exit_code == 0);
  RunResult bt = run_cli({"bpe-train", "--in", staged("units.dedup.txt"),
                          "--out", staged("bpe.model"), "--target-vocab", "10",
                          "--vocab", "4"},
                         tmp.path());
  REQUIRE(bt.exit_code == 0);
  RunResult be = run_cli({"bpe-encode", "--model", staged("bpe.model"), "--in",
                          staged("units.dedup.txt"), "--out",
                          staged("units.bpe.txt")},
                         tmp.path());
  REQUIRE(be.exit_code == 0);

  // Pack with the model's full vocabulary (base + merges) so the header
  // and bit width match the pipeline's container.
  dsu::BpeModel model = dsu::load_bpe_model(tmp / "staged" / "bpe.model");
  RunResult pk = run_cli({"pack", "--in", staged("units.bpe.txt"), "--out",
                          staged("units.dsu"), "--vocab",
                          std::to_string(model.vocab_size())},
                         tmp.path());
  REQUIRE(pk.exit_code == 0);
  RunResult st = run_cli({"stats", "--raw", staged("units.raw.txt"), "--dedup",
                          staged("units.dedup.txt"), "--bpe",
                          staged("units.bpe.txt"), "--out",
                          staged("stats.kv")},
                         tmp.path());
  REQUIRE(st.exit_code == 0);

  for (const char* name :
       {"codebook.dsf", "codebook.dsf.meta", "units.raw.txt",
        "units.dedup.txt", "bpe.model", "units.bpe.txt", "units.dsu",
        "stats.kv"}) {
    CAPTURE(name);
    CHECK(testutil::files_equal(tmp / "out1" / name, tmp / "staged" / name));
  }

  // The manifest's mask keys switch on the optional artifact.
  testutil::write_bytes(tmp / "run3.cfg", manifest("out3") +
                                              "mask.n_masks = 1\n"
                                              "mask.max_width = 2\n");
  RunResult r3 =
      run_cli({"pipeline", "--config", path_str(tmp / "run3.cfg")}, tmp.path());
  REQUIRE(r3.exit_code == 0);
  CHECK(std::filesystem::exists(tmp / "out3" / "units.masked.txt"));
  // Raw units are written before masking, so they match the unmasked run.
  CHECK(testutil::files_equal(tmp / "out1" / "units.raw.txt",
                              tmp / "out3" / "units.raw.txt"));
}

TEST_CASE("pipeline extracts features when given a wav list", "[cli]") {
  TempDir tmp;
  // Two short tones; frame counts stay small to keep clustering fast.
  testutil::write_wav(tmp / "one.wav", 16000,
                      sine_samples(4000, 500.0, 16000.0, 6000.0));
  testutil::write_wav(tmp / "two.wav", 16000,
                      sine_samples(4000, 2000.0, 16000.0, 6000.0));
  testutil::write_bytes(tmp / "wavs.list", "one.wav\ntwo.wav\n");
  testutil::write_bytes(tmp / "run.cfg",
                        "seed = 7\n"
                        "input.wav_list = wavs.list\n"
                        "out.dir = out\n"
                        "fbank.n_mels = 40\n"
                        "kmeans.k = 3\n"
                        "kmeans.max_iters = 10\n"
                        "bpe.target_vocab = 8\n");

  RunResult r =
      run_cli({"pipeline", "--config", path_str(tmp / "run.cfg")}, tmp.path());
  REQUIRE(r.exit_code == 0);

  CHECK(std::filesystem::exists(tmp / "out" / "features" / "0000_one.dsf"));
  CHECK(std::filesystem::exists(tmp / "out" / "features" / "0001_two.dsf"));
  CHECK(testutil::read_bytes(tmp / "out" / "features.list") ==
        "features/0000_one.dsf\nfeatures/0001_two.dsf\n");

  // Extracted features equal the library's direct computation.
  dsu::FbankConfig cfg;
  cfg.n_mels = 40;
  dsu::FeatureMatrix expect =
      dsu::compute_fbank(dsu::load_wav(tmp / "one.wav"), cfg);
  dsu::save_features(tmp / "expect.dsf", expect);
  CHECK(testutil::files_equal(tmp / "out" / "features" / "0000_one.dsf",
                              tmp / "expect.dsf"));

  // Unit sequences carry the prefixed stems as source ids.
  std::string raw = testutil::read_bytes(tmp / "out" / "units.raw.txt");
  CHECK(raw.find("0000_one\t") != std::string::npos);
  CHECK(raw.find("0001_two\t") != std::string::npos);
}

TEST_CASE("DSU_LOG gates diagnostics on standard error", "[cli]") {
  TempDir tmp;
  testutil::write_bytes(tmp / "u.txt", "a\t1 1 2\n");

  RunResult quiet = run_cli({"dedup", "--in", path_str(tmp / "u.txt"), "--out",
                             path_str(tmp / "d1.txt")},
                            tmp.path());
  REQUIRE(quiet.exit_code == 0);
  CHECK(quiet.err.empty());

  RunResult chatty = run_cli({"dedup", "--in", path_str(tmp / "u.txt"),
                              "--out", path_str(tmp / "d2.txt")},
                             tmp.path(), "DSU_LOG=debug");
  REQUIRE(chatty.exit_code == 0);
  CHECK_FALSE(chatty.err.empty());
  CHECK(testutil::files_equal(tmp / "d1.txt", tmp / "d2.txt"));
}
