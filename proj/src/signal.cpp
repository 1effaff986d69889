// src/signal.cpp

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

#include "snrd/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "snrd/errors.hpp"
#include "snrd/seed.hpp"

namespace snrd {

static_assert(std::endian::native == std::endian::little,
              "WAV and checkpoint I/O assume a little-endian host");

namespace {

std::uint32_t read_u32(const unsigned char *p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::uint16_t read_u16(const unsigned char *p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

template <typename T>
void put(std::vector<unsigned char> &out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open WAV file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError(where + "not a RIFF/WAVE file");

  bool have_fmt = false;
  const unsigned char *data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    std::uint32_t len = read_u32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Some writers leave a bogus length on the final data chunk.
      if (std::memcmp(chunk, "data", 4) == 0) len = std::uint32_t(bytes.size() - body);
      else throw FormatError(where + "truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw FormatError(where + "fmt chunk too short");
      const unsigned char *f = bytes.data() + body;
      const std::uint16_t format = read_u16(f);
      const std::uint16_t channels = read_u16(f + 2);
      const std::uint32_t rate = read_u32(f + 4);
      const std::uint16_t bits = read_u16(f + 14);
      if (format != 1)
        throw FormatError(where + "format tag " + std::to_string(format) + " (need PCM = 1)");
      if (channels != 1)
        throw FormatError(where + "channel count " + std::to_string(channels) + " (need mono)");
      if (rate != std::uint32_t(kSampleRate))
        throw FormatError(where + "sample rate " + std::to_string(rate) + " (need 16000)");
      if (bits != 16)
        throw FormatError(where + "bit depth " + std::to_string(bits) + " (need 16)");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt) throw FormatError(where + "missing fmt chunk");
  if (!data) throw FormatError(where + "missing data chunk");

  Waveform w;
  const std::size_t n = data_len / 2;
  w.samples.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t s;
    std::memcpy(&s, data + 2 * i, 2);
    w.samples[static_cast<Eigen::Index>(i)] = double(s) / 32768.0;
  }
  return w;
}

std::int16_t to_pcm16(double r) {
  const double scaled = std::round(r * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

void write_wav(const std::filesystem::path &path, const Waveform &w) {
  const std::uint32_t n = static_cast<std::uint32_t>(w.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put<std::uint32_t>(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, 1);
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, std::uint32_t(w.sample_rate));
  put<std::uint32_t>(out, std::uint32_t(w.sample_rate) * 2);
  put<std::uint16_t>(out, 2);
  put<std::uint16_t>(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put<std::uint32_t>(out, 2 * n);
  for (Eigen::Index i = 0; i < w.size(); ++i) put<std::int16_t>(out, to_pcm16(w.samples[i]));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char *>(out.data()), std::streamsize(out.size()));
  if (!f) throw Error("write failed: " + path.string());
}

double mean_power(const Eigen::Ref<const Eigen::VectorXd> &x) {
  if (x.size() == 0) return 0.0;
  return x.squaredNorm() / double(x.size());
}

Eigen::Index segment_offset(Eigen::Index available, Eigen::Index length, std::uint64_t seed) {
  if (available <= length) return 0;
  return static_cast<Eigen::Index>(uniform_from_seed(seed, std::uint64_t(available - length)));
}

Waveform sample_segment(const Waveform &w, Eigen::Index length, std::uint64_t seed) {
  if (length <= 0) throw ShapeError("sample_segment: length must be positive");
  if (w.size() == 0) throw DegenerateInputError("sample_segment: empty waveform");
  Waveform out;
  out.sample_rate = w.sample_rate;
  if (w.size() >= length) {
    out.samples = w.samples.segment(segment_offset(w.size(), length, seed), length);
    return out;
  }
  out.samples.resize(length);
  for (Eigen::Index i = 0; i < length; ++i) out.samples[i] = w.samples[i % w.size()];
  return out;
}

Mixture mix_at_snr(const Waveform &clean, const Waveform &noise, double snr_db,
                   std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw ConfigError("mix_at_snr: SNR must be finite");
  const double p_clean = mean_power(clean.samples);
  if (!(p_clean > 0)) throw DegenerateInputError("mix_at_snr: clean signal has zero power");
  if (!(mean_power(noise.samples) > 0))
    throw DegenerateInputError("mix_at_snr: noise signal has zero power");

  Waveform segment = sample_segment(noise, clean.size(), seed);
  const double p_noise = mean_power(segment.samples);
  if (!(p_noise > 0))
    throw DegenerateInputError("mix_at_snr: selected noise segment has zero power");

  Mixture m;
  m.gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  m.scaled_noise.samples = m.gain * segment.samples;
  m.noisy.samples = clean.samples + m.scaled_noise.samples;
  m.noisy.sample_rate = m.scaled_noise.sample_rate = clean.sample_rate;
  m.measured_snr_db = 10.0 * std::log10(p_clean / mean_power(m.scaled_noise.samples));
  return m;
}

}  // namespace snrd
