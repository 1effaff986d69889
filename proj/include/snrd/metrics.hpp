// snrd/metrics.hpp

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

#ifndef SNRD_METRICS_HPP_
#define SNRD_METRICS_HPP_

#include <Eigen/Dense>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "snrd/errors.hpp"
#include "snrd/signal.hpp"

namespace snrd {

inline constexpr double kSiSdrClampDb = 60.0;

/// Scale-invariant SDR in dB without clamping; +inf for an exact projection,
/// -inf when the estimate has no component along the reference.
double si_sdr_unclamped(const Eigen::Ref<const Eigen::VectorXd> &est,
                        const Eigen::Ref<const Eigen::VectorXd> &ref);

/// si_sdr_unclamped clamped to [-60, 60] dB.
double si_sdr(const Eigen::Ref<const Eigen::VectorXd> &est,
              const Eigen::Ref<const Eigen::VectorXd> &ref);

/// Short-time objective intelligibility of `est` against the clean `ref`, both
/// at `sample_rate` (16 kHz or 10 kHz). Follows the widely used reference
/// implementation: Octave-compatible polyphase resampling to 10 kHz, silent
/// frame removal at 40 dB, 15 third-octave bands from 150 Hz, 30-frame
/// segments and -15 dB clipping.
/// Throws DegenerateInputError when `ref` is silent or fewer than 30 frames
/// remain after silence removal.
double stoi(const Eigen::Ref<const Eigen::VectorXd> &est,
            const Eigen::Ref<const Eigen::VectorXd> &ref, int sample_rate = kSampleRate);

inline double stoi(const Waveform &est, const Waveform &ref) {
  if (est.sample_rate != ref.sample_rate)
    throw ShapeError("stoi: sample rates differ");
  return stoi(est.samples, ref.samples, est.sample_rate);
}

namespace stoi_detail {
// Exposed for tests.
Eigen::VectorXd resample_16k_to_10k(const Eigen::Ref<const Eigen::VectorXd> &x);
// 15 x 257 band matrix over 512-point spectra at 10 kHz.
Eigen::MatrixXd third_octave_bands();
}  // namespace stoi_detail

enum class Condition { kNoisy, kEnhanced };

std::string to_string(Condition c);

struct MetricRecord {
  std::string noise;
  double snr_db = 0.0;
  Condition condition = Condition::kNoisy;
  double stoi = 0.0;
  double sisdr = 0.0;
};

struct MetricRow {
  std::string noise;
  double snr_db = 0.0;
  std::string snr_group;  // "seen", "unseen" or empty when unknown
  Condition condition = Condition::kNoisy;
  double mean_stoi = 0.0;
  double mean_sisdr = 0.0;
  std::size_t count = 0;
};

struct MetricReport {
  std::vector<MetricRow> rows;

  double overall_stoi(Condition c) const;
  double overall_sisdr(Condition c) const;
};

/// Groups by (noise, snr, condition). Rows come out ordered by noise, then
/// SNR, then noisy before enhanced. Means are independent of record order.
MetricReport aggregate(const std::vector<MetricRecord> &records);

/// Header: noise,snr_db,snr_group,condition,mean_stoi,mean_sisdr,count
/// (an unknown snr_group is written as "-").
void write_report_csv(std::ostream &os, const MetricReport &report);
void write_report_csv(const std::filesystem::path &path, const MetricReport &report);

}  // namespace snrd

#endif  // SNRD_METRICS_HPP_
