// snrd/run.hpp

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

// Run directories. Every command that trains writes, inside its output root:
//   config.json            frozen run configuration (written before training)
//   checkpoints/model.ckpt
//   curves.csv
//   log.txt

#ifndef SNRD_RUN_HPP_
#define SNRD_RUN_HPP_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "snrd/train.hpp"

namespace snrd {

struct RunConfig {
  ArchConfig arch;
  TrainConfig train;
  DistillConfig distill;
  /// Teacher runs only: declared SNR hull (derived from the corpus if absent).
  std::optional<SnrHull> teacher_hull;
  std::uint64_t init_seed = 0;

  void validate() const;

  static RunConfig paper_teacher();
  static RunConfig paper_student();
  static RunConfig toy_teacher();
  static RunConfig toy_student();
};

void to_json(nlohmann::json &j, const RunConfig &c);
void from_json(const nlohmann::json &j, RunConfig &c);

RunConfig read_run_config(const std::filesystem::path &path);

struct RunSummary {
  std::string mode;  // "teacher", "S1" or "S2"
  std::int64_t steps = 0;
  int epochs = 0;
  std::string stop_reason;
  std::vector<CurvePoint> curves;
};

RunSummary run_train_teacher(const RunConfig &config, const std::filesystem::path &manifest,
                             const std::filesystem::path &out_dir, std::ostream *log = nullptr);

/// Without `teachers` the student runs in S1 mode (alpha forced to 0).
RunSummary run_train_student(const RunConfig &config, const std::filesystem::path &manifest,
                             const std::optional<std::filesystem::path> &teachers,
                             const std::filesystem::path &out_dir, std::ostream *log = nullptr);

/// Enhances one WAV file with a checkpoint (read as f32 or f64).
void run_enhance(const std::filesystem::path &checkpoint, const std::filesystem::path &in_wav,
                 const std::filesystem::path &out_wav, Precision precision = Precision::kF32,
                 int window = 16384);

/// Scores a rendered test manifest. With no checkpoint the enhanced signal is
/// the noisy input. Seen/unseen tags come from the training run's config.json
/// (two levels above the checkpoint) when it records train_snrs.
MetricReport run_evaluate(const std::optional<std::filesystem::path> &checkpoint,
                          const std::filesystem::path &test_manifest,
                          const std::filesystem::path &out_csv,
                          Precision precision = Precision::kF32, int window = 16384);

}  // namespace snrd

#endif  // SNRD_RUN_HPP_
