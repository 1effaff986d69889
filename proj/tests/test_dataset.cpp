// tests/test_dataset.cpp

// Copyright 2026   snrd authors
//
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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <set>
#include <unistd.h>

#include "snrd/dataset.hpp"
#include "snrd/errors.hpp"
#include "snrd/parallel.hpp"
#include "snrd/signal.hpp"

namespace snrd {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string &name) {
  fs::path d = fs::temp_directory_path() / ("snrd_dataset_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<fs::path> fake_files(const std::string &dir, const std::string &prefix, int n) {
  std::vector<fs::path> out;
  for (int i = 0; i < n; ++i) out.push_back(fs::path(dir) / (prefix + std::to_string(i) + ".wav"));
  return out;
}

std::size_t count_split(const Manifest &m, Split s) {
  std::size_t n = 0;
  for (const auto &r : m) n += r.split == s;
  return n;
}

TEST(Presets, PaperTeacherCorpora) {
  auto preset = paper_synth_preset("tc", "tn", "ec", "en", 7);
  ASSERT_EQ(preset.teachers.size(), 4u);
  auto clean = fake_files("tc", "utt", 3696);  // TIMIT-sized pool
  auto noise = fake_files("tn", "noise", 5);
  const std::vector<std::vector<double>> bands = {
      {-20, -17, -13, -11}, {-10, -7, -3, -1}, {0, 3, 7, 9}, {10, 13, 17, 20}};
  check_disjoint_hulls(preset.teachers);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(preset.teachers[t].snr_set, bands[t]);
    Manifest m = build_manifest(preset.teachers[t], clean, noise);
    EXPECT_EQ(m.size(), 19000u);
    EXPECT_EQ(count_split(m, Split::kTrain), 18000u);
    EXPECT_EQ(count_split(m, Split::kVal), 1000u);
    std::set<fs::path> used;
    for (const auto &r : m) used.insert(r.clean_path);
    EXPECT_EQ(used.size(), 950u);
  }
}

TEST(Presets, PaperStudentAndTestCorpora) {
  auto preset = paper_synth_preset("tc", "tn", "ec", "en", 7);
  Manifest s = build_manifest(*preset.student, fake_files("tc", "utt", 3696),
                              fake_files("tn", "noise", 5));
  EXPECT_EQ(s.size(), 23750u);
  EXPECT_EQ(count_split(s, Split::kTrain), 22000u);
  EXPECT_EQ(count_split(s, Split::kVal), 1750u);

  auto noises = fake_files("tn", "noise", 5);
  for (auto &p : fake_files("en", "chime", 4)) noises.push_back(p);
  Manifest t = build_manifest(*preset.test, fake_files("ec", "tst", 1344), noises);
  EXPECT_EQ(t.size(), 8100u);
  EXPECT_EQ(count_split(t, Split::kTest), 8100u);

  auto has = [](const Manifest &m, double snr) {
    for (const auto &r : m)
      if (r.snr_db == snr) return true;
    return false;
  };
  EXPECT_TRUE(has(t, -15));
  EXPECT_FALSE(has(s, -15));
}

TEST(Teachers, OverlappingHullsAreRejected) {
  CorpusConfig a, b;
  a.name = "low";
  b.name = "mid";
  a.clean_dirs = b.clean_dirs = {"c"};
  a.noise_dirs = b.noise_dirs = {"n"};
  a.snr_set = {-20, -11};
  b.snr_set = {-12, 0};
  try {
    check_disjoint_hulls({a, b});
    FAIL();
  } catch (const ConfigError &e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'low'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'mid'"), std::string::npos) << msg;
  }
  b.snr_set = {-10, 0};
  EXPECT_NO_THROW(check_disjoint_hulls({a, b}));
  EXPECT_THROW(build_teacher_corpora({a, {}}), ConfigError);
}

TEST(Config, ValidationNamesTheField) {
  auto j = nlohmann::json::parse(R"({"name":"x","clean_dirs":["a"],"noise_dirs":["b"],
                                     "snr_set":[], "split":{"train":1}})");
  try {
    j.get<CorpusConfig>();
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("snr_set"), std::string::npos);
  }
  j["snr_set"] = {0};
  j["split"] = {{"train", 0.5}, {"val", 0.4}};
  EXPECT_THROW(j.get<CorpusConfig>(), ConfigError);
  j["split"] = {{"train", 0.5}, {"val", 0.5}};
  CorpusConfig c = j.get<CorpusConfig>();
  EXPECT_EQ(nlohmann::json(c).get<CorpusConfig>().split_fractions, c.split_fractions);
  j["colour"] = "red";
  EXPECT_THROW(j.get<CorpusConfig>(), ConfigError);
}

TEST(Manifest, SplitsAndSeedsArePureFunctionsOfConfig) {
  CorpusConfig c;
  c.name = "s";
  c.clean_dirs = {"c"};
  c.noise_dirs = {"n"};
  c.snr_set = {0, 5};
  c.split_fractions = {{Split::kTrain, 0.7}, {Split::kVal, 0.3}};
  c.master_seed = 99;
  auto clean = fake_files("c", "u", 10);
  auto noise = fake_files("n", "z", 3);
  Manifest a = build_manifest(c, clean, noise);
  Manifest b = build_manifest(c, clean, noise);
  EXPECT_EQ(a, b);
  EXPECT_EQ(count_split(a, Split::kTrain), 42u);
  c.master_seed = 100;
  Manifest d = build_manifest(c, clean, noise);
  EXPECT_NE(a[0].noise_offset_seed, d[0].noise_offset_seed);
}

TEST(Manifest, SamplePairingDrawsFromTheConfiguredSets) {
  CorpusConfig c;
  c.name = "smp";
  c.clean_dirs = {"c"};
  c.noise_dirs = {"n"};
  c.snr_set = {-3, 3};
  c.pairing = Pairing::kSample;
  c.total_count = 200;
  Manifest m = build_manifest(c, fake_files("c", "u", 4), fake_files("n", "z", 2));
  ASSERT_EQ(m.size(), 200u);
  std::set<double> snrs;
  for (auto &r : m) snrs.insert(r.snr_db);
  EXPECT_EQ(snrs, (std::set<double>{-3, 3}));
}

TEST(Manifest, DuplicateIdsAreRejected) {
  CorpusConfig c;
  c.name = "dup";
  c.clean_dirs = {"a", "b"};
  c.noise_dirs = {"n"};
  c.snr_set = {0};
  // same stem in two clean directories
  EXPECT_THROW(build_manifest(c, {"a/x.wav", "b/x.wav"}, {"n/z.wav"}), ConfigError);
}

TEST(Manifest, JsonLinesRoundTripWithExactFields) {
  fs::path dir = scratch("jsonl");
  CorpusConfig c;
  c.name = "rt";
  c.clean_dirs = {dir / "c"};
  c.noise_dirs = {dir / "n"};
  c.snr_set = {-2.5, 7};
  c.split_fractions = {{Split::kTrain, 0.5}, {Split::kVal, 0.5}};
  Manifest m = build_manifest(c, fake_files((dir / "c").string(), "u", 2),
                              fake_files((dir / "n").string(), "z", 2));
  write_manifest(dir / "m.jsonl", m);
  EXPECT_EQ(read_manifest(dir / "m.jsonl"), m);

  std::ifstream is(dir / "m.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    auto j = nlohmann::json::parse(line);
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    EXPECT_EQ(keys, (std::set<std::string>{"id", "clean_path", "noise_path", "snr_db",
                                           "noise_offset_seed", "split"}));
    EXPECT_EQ(j["clean_path"].get<std::string>().substr(0, 2), "c/");
    ++lines;
  }
  EXPECT_EQ(lines, 8);

  std::ofstream(dir / "bad.jsonl") << R"({"id":"a","clean_path":"x","noise_path":"y","snr_db":0,"noise_offset_seed":1,"split":"train","extra":1})"
                                   << "\n";
  EXPECT_THROW(read_manifest(dir / "bad.jsonl"), FormatError);
  std::ofstream(dir / "bad2.jsonl") << R"({"id":"a","clean_path":"x","noise_path":"y","snr_db":0,"split":"train"})"
                                    << "\n";
  EXPECT_THROW(read_manifest(dir / "bad2.jsonl"), FormatError);
}

TEST(Toy, PresetCounts) {
  fs::path root = scratch("toy");
  write_toy_sources(root / "sources", 5);
  auto preset = toy_synth_preset(root / "sources", 5);
  auto teachers = build_teacher_corpora(preset.teachers);
  ASSERT_EQ(teachers.size(), 2u);
  EXPECT_EQ(teachers[0].size(), 16u);
  EXPECT_EQ(teachers[1].size(), 16u);
  EXPECT_EQ(build_student_corpus(*preset.student).size(), 20u);
  Manifest test = build_test_corpus(*preset.test);
  EXPECT_EQ(test.size(), 36u);
  std::set<std::string> noises;
  for (auto &r : test) noises.insert(r.noise_name());
  EXPECT_EQ(noises, (std::set<std::string>{"band_a", "band_c"}));
}

TEST(Render, DeterministicCompleteAndAccurate) {
  fs::path root = scratch("render");
  write_toy_sources(root / "sources", 8, 0.5);
  auto preset = toy_synth_preset(root / "sources", 8);
  Manifest m = build_corpus(preset.teachers[0]);
  const fs::path mp = root / "manifests" / "teacher1.jsonl";
  write_manifest(mp, m);

  set_worker_count(1);
  auto log = render(mp, read_manifest(mp));
  std::vector<std::vector<char>> first;
  auto slurp = [](const fs::path &p) {
    std::ifstream is(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
  };
  for (auto &r : m) first.push_back(slurp(rendered_path(mp, r)));
  auto log_bytes = slurp(root / "manifests" / "teacher1" / "render_log.csv");

  set_worker_count(4);
  render(mp, read_manifest(mp));
  set_worker_count(0);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(slurp(rendered_path(mp, m[i])), first[i]);
  EXPECT_EQ(slurp(root / "manifests" / "teacher1" / "render_log.csv"), log_bytes);

  std::size_t wavs = 0;
  for (auto &e : fs::directory_iterator(root / "manifests" / "teacher1"))
    wavs += e.path().extension() == ".wav";
  EXPECT_EQ(wavs, m.size());
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(log[i].measured_snr_db, m[i].snr_db, 1e-9);
}

TEST(Render, EqualPowerAtZeroDbHasUnitGain) {
  fs::path root = scratch("unit_gain");
  Waveform clean = synth_toy_audio(ToyKind::kTone, 1, 0.25);
  Waveform noise = clean;
  noise.samples = -clean.samples;
  write_wav(root / "c.wav", clean);
  write_wav(root / "n.wav", noise);
  UtteranceRecord r{"r0", root / "c.wav", root / "n.wav", 0.0, 17, Split::kTrain};
  auto log = render(root / "m.jsonl", {r});
  EXPECT_NEAR(log[0].gain, 1.0, 1e-12);

  UtteranceRecord missing{"lost_one", root / "nope.wav", root / "n.wav", 0.0, 1, Split::kTrain};
  try {
    render(root / "m.jsonl", {missing});
    FAIL();
  } catch (const FormatError &e) {
    EXPECT_NE(std::string(e.what()).find("lost_one"), std::string::npos);
  }
}

TEST(ToyAudio, DeterministicAndSized) {
  for (auto kind : {ToyKind::kTone, ToyKind::kChirp, ToyKind::kNoiseband}) {
    Waveform a = synth_toy_audio(kind, 3, 1.024);
    Waveform b = synth_toy_audio(kind, 3, 1.024);
    EXPECT_EQ(a.size(), 16384);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_NE(a.samples, synth_toy_audio(kind, 4, 1.024).samples);
    EXPECT_LE(a.samples.cwiseAbs().maxCoeff(), 1.0);
  }
  EXPECT_THROW(synth_toy_audio(ToyKind::kTone, 1, 0.0), ConfigError);
}

// Plain O(N^2) DFT magnitude; the oracle for spectral checks.
std::vector<double> dft_magnitude(const Eigen::VectorXd &x) {
  const Eigen::Index n = x.size();
  std::vector<double> mag(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    const double w = -2.0 * std::numbers::pi / double(n);
    for (Eigen::Index i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, w * double((k * i) % n));
    mag[k] = std::abs(acc);
  }
  return mag;
}

TEST(ToyAudio, ToneSpectralPeakSitsAtTheFundamental) {
  Waveform w = synth_toy_audio(ToyKind::kTone, 21, 1.024, 440.0);
  auto mag = dft_magnitude(w.samples);
  const auto peak = std::max_element(mag.begin(), mag.end()) - mag.begin();
  const double bin_hz = 16000.0 / 16384.0;
  EXPECT_NEAR(double(peak) * bin_hz, 440.0, bin_hz);
}

TEST(ToyAudio, NoisebandEnergyIsBandLimited) {
  // Pass bands start at 100 Hz or above, so nothing may remain below it.
  Waveform w = synth_toy_audio(ToyKind::kNoiseband, 5, 0.128);
  auto mag = dft_magnitude(w.samples);
  const double bin_hz = 16000.0 / double(w.size());
  double below = 0, total = 0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    total += mag[k] * mag[k];
    if (double(k) * bin_hz < 100.0) below += mag[k] * mag[k];
  }
  EXPECT_GT(total, 0.0);
  EXPECT_LT(below, 1e-20 * total);
}

}  // namespace
}  // namespace snrd
