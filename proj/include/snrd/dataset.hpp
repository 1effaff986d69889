// snrd/dataset.hpp

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

// Corpus synthesis. A corpus is a manifest (JSON Lines, one UtteranceRecord
// per line) plus the mixtures rendered from it. Record ids, noise offsets and
// split membership are all derived from the corpus config and master seed, so
// rebuilding a manifest reproduces it exactly.

#ifndef SNRD_DATASET_HPP_
#define SNRD_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snrd/signal.hpp"

namespace snrd {

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split s);
Split split_from_string(const std::string &s);

struct UtteranceRecord {
  std::string id;
  std::filesystem::path clean_path;
  std::filesystem::path noise_path;
  double snr_db = 0.0;
  std::uint64_t noise_offset_seed = 0;
  Split split = Split::kTrain;

  /// Noise label used in reports: the noise file's stem.
  std::string noise_name() const { return noise_path.stem().string(); }
  bool operator==(const UtteranceRecord &) const = default;
};

using Manifest = std::vector<UtteranceRecord>;

/// How sources and SNRs are combined.
///   grid:   every (clean, noise, snr) triple, repeated count_per_pairing times
///   sample: total_count records, each drawing clean, noise and snr uniformly
enum class Pairing { kGrid, kSample };

/// clean_dirs and noise_dirs entries may name directories (all *.wav inside,
/// sorted) or individual WAV files.
struct CorpusConfig {
  std::string name;
  std::vector<std::filesystem::path> clean_dirs;
  std::vector<std::filesystem::path> noise_dirs;
  std::vector<double> snr_set;
  Pairing pairing = Pairing::kGrid;
  int count_per_pairing = 1;
  int total_count = 0;
  /// When set, only this many clean files are used, picked by seeded rank.
  std::optional<int> clean_count;
  /// Fractions per split; must sum to 1.
  std::map<Split, double> split_fractions{{Split::kTrain, 1.0}};
  std::uint64_t master_seed = 0;

  void validate() const;
  double snr_lo() const;
  double snr_hi() const;
  std::size_t expected_count(std::size_t n_clean, std::size_t n_noise) const;
};

void to_json(nlohmann::json &j, const CorpusConfig &c);
void from_json(const nlohmann::json &j, CorpusConfig &c);

/// Everything `snrd synth` builds.
struct SynthConfig {
  std::vector<CorpusConfig> teachers;
  std::optional<CorpusConfig> student;
  std::optional<CorpusConfig> test;
};

void to_json(nlohmann::json &j, const SynthConfig &c);
void from_json(const nlohmann::json &j, SynthConfig &c);

/// Paper corpus recipe over the given source directories: four teacher
/// corpora (950 clean x 5 noises x 4 SNRs), the student corpus (950 x 5 x 5)
/// and the test corpus (100 x 9 x 9).
SynthConfig paper_synth_preset(const std::filesystem::path &train_clean_dir,
                               const std::filesystem::path &train_noise_dir,
                               const std::filesystem::path &test_clean_dir,
                               const std::filesystem::path &test_noise_dir,
                               std::uint64_t seed);

/// CI-sized recipe over a write_toy_sources tree: two teachers of 16 records
/// (4 clean x 2 noises x 2 SNRs, bands [-10,-5] and [5,10] dB), a student
/// corpus of 20 (4 clean x 1 noise x 5 SNRs) and a test corpus of 36
/// (2 unseen clean x {1 seen, 1 unseen noise} x 9 SNRs).
SynthConfig toy_synth_preset(const std::filesystem::path &sources_root, std::uint64_t seed);

/// Expands directories to their sorted *.wav files; file entries pass through.
std::vector<std::filesystem::path> list_wavs(const std::vector<std::filesystem::path> &dirs);

/// Builds one manifest from explicit source lists (no filesystem access).
Manifest build_manifest(const CorpusConfig &config,
                        const std::vector<std::filesystem::path> &clean,
                        const std::vector<std::filesystem::path> &noise);

/// Builds one manifest, listing the config's directories.
Manifest build_corpus(const CorpusConfig &config);

/// Checks that the SNR hulls of the configs are pairwise disjoint (throws
/// ConfigError naming the first overlapping pair), then builds each corpus.
std::vector<Manifest> build_teacher_corpora(const std::vector<CorpusConfig> &configs);
void check_disjoint_hulls(const std::vector<CorpusConfig> &configs);

Manifest build_student_corpus(const CorpusConfig &config);
Manifest build_test_corpus(const CorpusConfig &config);

/// Writes JSON Lines with exactly the fields id, clean_path, noise_path,
/// snr_db, noise_offset_seed, split. Paths are written relative to the
/// manifest's directory.
void write_manifest(const std::filesystem::path &path, const Manifest &manifest);

/// Reads and validates a manifest; relative paths resolve against the
/// manifest's directory. Malformed lines raise FormatError with the line number.
Manifest read_manifest(const std::filesystem::path &path);

/// Rendered mixture location: <manifest dir>/<manifest stem>/<id>.wav
std::filesystem::path rendered_path(const std::filesystem::path &manifest_path,
                                    const UtteranceRecord &record);

struct RenderLogEntry {
  std::string id;
  double gain = 0.0;
  double measured_snr_db = 0.0;
};

/// Mixes every record with mix_at_snr(clean, noise, snr_db, noise_offset_seed)
/// and writes rendered_path(...) plus <manifest stem>/render_log.csv.
/// Records are processed in parallel; output does not depend on worker count.
std::vector<RenderLogEntry> render(const std::filesystem::path &manifest_path,
                                   const Manifest &manifest);

/// "split snr count" lines for a manifest.
std::string summarize(const Manifest &manifest);

enum class ToyKind { kTone, kChirp, kNoiseband };

ToyKind toy_kind_from_string(const std::string &s);

/// Synthetic stand-ins for speech and noise at 16 kHz.
///   tone:      harmonic complex with a slow syllabic envelope; the
///              fundamental dominates the spectrum
///   chirp:     harmonic linear sweep with the same envelope
///   noiseband: Gaussian noise band-limited to a seeded pass band
/// f0_hz = 0 picks the fundamental (or sweep start) from the seed.
Waveform synth_toy_audio(ToyKind kind, std::uint64_t seed, double duration_s,
                         double f0_hz = 0.0);

/// Writes the toy source tree used by the --toy presets:
///   <root>/clean_train (4 files), clean_test (2), noise_train (2), noise_test (1)
void write_toy_sources(const std::filesystem::path &root, std::uint64_t seed,
                       double duration_s = 1.28);

}  // namespace snrd

#endif  // SNRD_DATASET_HPP_
