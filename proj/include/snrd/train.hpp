// snrd/train.hpp

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

// Training, enhancement and evaluation on rendered corpora.

#ifndef SNRD_TRAIN_HPP_
#define SNRD_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "snrd/dataset.hpp"
#include "snrd/distill.hpp"
#include "snrd/metrics.hpp"
#include "snrd/unet.hpp"

namespace snrd {

enum class Precision { kF32, kF64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string &s);

struct TrainConfig {
  int batch_size = 16;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double lr_initial = 0.002;
  /// lr is multiplied by lr_decay every lr_decay_epochs epochs; 0 disables.
  int lr_decay_epochs = 300;
  double lr_decay = 0.5;
  /// Stop once validation loss has not improved for this many epochs; 0 disables.
  int patience = 100;
  int max_epochs = 1000;
  /// Stop after this many optimizer steps; 0 means no limit.
  std::int64_t max_steps = 0;
  /// Training window length in samples; must be divisible by 2^resampling_stages.
  int window = 16384;
  int eval_every = 10;
  std::uint64_t seed = 0;
  Precision precision = Precision::kF32;

  void validate() const;
  double lr_at_epoch(int epoch) const;  // epoch is 1-based

  static TrainConfig teacher_preset();
  static TrainConfig student_preset();
  static TrainConfig toy();
};

void to_json(nlohmann::json &j, const TrainConfig &c);
void from_json(const nlohmann::json &j, TrainConfig &c);
void to_json(nlohmann::json &j, const DistillConfig &c);
void from_json(const nlohmann::json &j, DistillConfig &c);

/// One aligned (noisy, clean) pair loaded from a rendered corpus.
struct Example {
  std::string id;
  std::string noise;
  double snr_db = 0.0;
  Eigen::VectorXd noisy;
  Eigen::VectorXd clean;
};

struct ExampleSet {
  std::vector<Example> train;
  std::vector<Example> val;
  std::vector<Example> test;
};

/// Reads the rendered mixture of every record plus its clean source.
ExampleSet load_examples(const std::filesystem::path &manifest_path);

struct CurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_stoi = 0.0;
  double val_sisdr = 0.0;
};

/// Header epoch,train_loss,val_loss,val_stoi,val_sisdr; losses are half the
/// mean squared error per audio sample.
void write_curves_csv(const std::filesystem::path &path, const std::vector<CurvePoint> &curves);

template <typename Scalar>
struct TrainResult {
  Model<Scalar> model;
  std::vector<CurvePoint> curves;
  std::int64_t steps = 0;
  int epochs = 0;
  double last_batch_loss = 0.0;  // half MSE per sample of the final step
  std::string stop_reason;
};

/// Trains `model` in place. With `bank`, each example's teacher is routed by
/// its snr_db and the loss is distill_loss with `alpha`; without a bank the
/// loss is distill_loss with alpha = 0. Deterministic for a given config.
template <typename Scalar>
TrainResult<Scalar> train(Model<Scalar> model, const std::vector<Example> &train_set,
                          const std::vector<Example> &val_set, const TrainConfig &cfg,
                          double alpha, const TeacherBank<Scalar> *bank,
                          std::ostream *log = nullptr);

/// Splits `x` into consecutive windows (last one zero-padded), enhances each
/// in infer mode and truncates the result to the input length.
template <typename Scalar>
Eigen::VectorXd enhance(const Model<Scalar> &model, const Eigen::VectorXd &x, int window = 16384);

/// Seen/unseen label for a test SNR given the student's training SNRs.
std::string snr_group(double snr_db, const std::set<double> &train_snrs);

/// Scores noisy and enhanced versions of every test record. A null model
/// means pass-through (enhanced = noisy). With `train_snrs`, rows are tagged
/// seen/unseen.
template <typename Scalar>
MetricReport evaluate(const Model<Scalar> *model, const std::vector<Example> &test,
                      int window = 16384, const std::set<double> *train_snrs = nullptr);

}  // namespace snrd

#endif  // SNRD_TRAIN_HPP_
