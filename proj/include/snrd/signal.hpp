// snrd/signal.hpp

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

#ifndef SNRD_SIGNAL_HPP_
#define SNRD_SIGNAL_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>

namespace snrd {

inline constexpr int kSampleRate = 16000;

/// Mono audio. Samples nominally live in [-1, 1]; values outside are legal
/// in memory and are clamped only when written to disk.
struct Waveform {
  Eigen::VectorXd samples;
  int sample_rate = kSampleRate;

  Eigen::Index size() const { return samples.size(); }
};

/// Reads RIFF/WAVE, PCM tag 1, 16-bit, mono, 16 kHz. Integer sample s maps to
/// s / 32768. Anything else raises FormatError naming the offending field.
Waveform read_wav(const std::filesystem::path &path);

/// Writes 16-bit PCM mono with clamp(round(r * 32768), -32768, 32767).
void write_wav(const std::filesystem::path &path, const Waveform &w);

std::int16_t to_pcm16(double r);

/// Mean of squared samples over the whole signal.
double mean_power(const Eigen::Ref<const Eigen::VectorXd> &x);

struct Mixture {
  Waveform noisy;
  Waveform scaled_noise;
  double gain = 0.0;
  double measured_snr_db = 0.0;
};

/// Adds noise to clean speech at `snr_db`. The noise is cut to the clean
/// length with sample_segment(noise, len(clean), seed) and scaled by
///   g = sqrt(P_clean / (P_segment * 10^(snr_db / 10))).
/// Throws DegenerateInputError when either input has zero power.
Mixture mix_at_snr(const Waveform &clean, const Waveform &noise, double snr_db,
                   std::uint64_t seed);

/// Offset drawn by sample_segment for a signal of `available` samples.
Eigen::Index segment_offset(Eigen::Index available, Eigen::Index length, std::uint64_t seed);

/// Contiguous `length`-sample slice at a seeded uniform offset. Signals
/// shorter than `length` are repeated cyclically from their first sample.
Waveform sample_segment(const Waveform &w, Eigen::Index length, std::uint64_t seed);

}  // namespace snrd

#endif  // SNRD_SIGNAL_HPP_
