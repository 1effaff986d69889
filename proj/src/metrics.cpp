// src/metrics.cpp

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

#include "snrd/metrics.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <tuple>

namespace snrd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kStoiRate = 10000;
constexpr int kFrame = 256;
constexpr int kHop = 128;
constexpr int kFft = 512;
constexpr int kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr int kSegment = 30;
constexpr double kBetaDb = -15.0;
constexpr double kDynRangeDb = 40.0;

void require_same_length(Eigen::Index a, Eigen::Index b, const char *who) {
  if (a != b)
    throw ShapeError(std::string(who) + ": length mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Octave's resample() filter design for p/q with 60 dB rejection.
Eigen::VectorXd octave_window(int p, int q) {
  const double stopband = 1.0 / (2.0 * std::max(p, q));
  const double roll_off = stopband / 10.0;
  const double rejection_db = 60.0;
  const int half = int(std::ceil((rejection_db - 8.0) / (28.714 * roll_off)));
  const double beta = 0.1102 * (rejection_db - 8.7);
  const int len = 2 * half + 1;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  Eigen::VectorXd h(len);
  for (int n = 0; n < len; ++n) {
    const double t = n - half;
    const double r = 2.0 * n / (len - 1) - 1.0;
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = kaiser * 2.0 * p * stopband * sinc(2.0 * stopband * t);
  }
  return h / h.sum();
}

// Polyphase upsample-filter-downsample with the same alignment as
// scipy.signal.resample_poly for an odd-length filter.
Eigen::VectorXd resample_poly(const Eigen::Ref<const Eigen::VectorXd> &x, int up, int down,
                              const Eigen::VectorXd &window) {
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  const Eigen::Index n_in = x.size();
  const Eigen::Index n_out = (n_in * up + down - 1) / down;
  const Eigen::Index half_len = (window.size() - 1) / 2;
  const Eigen::Index pre_pad = down - half_len % down;
  const Eigen::Index pre_remove = (half_len + pre_pad) / down;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(pre_pad + window.size());
  h.tail(window.size()) = window * double(up);
  const Eigen::Index hl = h.size();

  Eigen::VectorXd out(n_out);
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const Eigen::Index pos = (pre_remove + k) * down;
    // i ranges over inputs with 0 <= pos - i*up < hl
    Eigen::Index i_hi = std::min<Eigen::Index>(n_in - 1, pos / up);
    Eigen::Index i_lo = pos - hl + 1 <= 0 ? 0 : (pos - hl + up) / up;
    double acc = 0.0;
    for (Eigen::Index i = i_lo; i <= i_hi; ++i) acc += x[i] * h[pos - i * up];
    out[k] = acc;
  }
  return out;
}

Eigen::VectorXd hann_inner(int n) {
  // numpy.hanning(n + 2)[1:-1]
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1));
  return w;
}

// Frame starts used throughout the reference code: range(0, len - frame, hop).
Eigen::Index frame_count(Eigen::Index len) {
  return len > kFrame ? (len - kFrame + kHop - 1) / kHop : 0;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> remove_silent_frames(const Eigen::VectorXd &x,
                                                                 const Eigen::VectorXd &y) {
  const Eigen::VectorXd w = hann_inner(kFrame);
  const Eigen::Index n = frame_count(x.size());
  if (n == 0) throw DegenerateInputError("stoi: signal shorter than one analysis frame");
  Eigen::VectorXd energy(n);
  double peak_norm = 0.0;
  for (Eigen::Index f = 0; f < n; ++f) {
    const double norm = (w.array() * x.segment(f * kHop, kFrame).array()).matrix().norm();
    peak_norm = std::max(peak_norm, norm);
    energy[f] = 20.0 * std::log10(norm + kEps);
  }
  if (peak_norm == 0.0) throw DegenerateInputError("stoi: reference signal is silent");
  const double floor_db = energy.maxCoeff() - kDynRangeDb;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index f = 0; f < n; ++f)
    if (floor_db - energy[f] < 0) kept.push_back(f);

  const Eigen::Index out_len = Eigen::Index(kept.size() - 1) * kHop + kFrame;
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(out_len), ys = Eigen::VectorXd::Zero(out_len);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Eigen::Index src = kept[j] * kHop, dst = Eigen::Index(j) * kHop;
    xs.segment(dst, kFrame).array() += w.array() * x.segment(src, kFrame).array();
    ys.segment(dst, kFrame).array() += w.array() * y.segment(src, kFrame).array();
  }
  return {xs, ys};
}

// Third-octave band magnitudes, bands x frames.
Eigen::MatrixXd band_envelopes(const Eigen::VectorXd &x, const Eigen::MatrixXd &obm) {
  const Eigen::VectorXd w = hann_inner(kFrame);
  const Eigen::Index n = frame_count(x.size());
  Eigen::MatrixXd power(kFft / 2 + 1, n);
  Eigen::FFT<double> fft;
  std::vector<double> buf(kFft, 0.0);
  std::vector<std::complex<double>> spec;
  for (Eigen::Index f = 0; f < n; ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int i = 0; i < kFrame; ++i) buf[i] = w[i] * x[f * kHop + i];
    fft.fwd(spec, buf);
    for (int b = 0; b <= kFft / 2; ++b) power(b, f) = std::norm(spec[b]);
  }
  return (obm * power).cwiseSqrt();
}

}  // namespace

namespace stoi_detail {

Eigen::VectorXd resample_16k_to_10k(const Eigen::Ref<const Eigen::VectorXd> &x) {
  static const Eigen::VectorXd window = octave_window(5, 8);
  return resample_poly(x, 5, 8, window);
}

Eigen::MatrixXd third_octave_bands() {
  const int bins = kFft / 2 + 1;
  Eigen::VectorXd f(bins);
  for (int i = 0; i < bins; ++i) f[i] = double(kStoiRate) * i / kFft;
  auto nearest = [&](double target) {
    int best = 0;
    for (int i = 1; i < bins; ++i)
      if ((f[i] - target) * (f[i] - target) < (f[best] - target) * (f[best] - target)) best = i;
    return best;
  };
  Eigen::MatrixXd obm = Eigen::MatrixXd::Zero(kBands, bins);
  for (int k = 0; k < kBands; ++k) {
    const int lo = nearest(kMinFreq * std::pow(2.0, (2.0 * k - 1) / 6.0));
    const int hi = nearest(kMinFreq * std::pow(2.0, (2.0 * k + 1) / 6.0));
    for (int i = lo; i < hi; ++i) obm(k, i) = 1.0;
  }
  return obm;
}

}  // namespace stoi_detail

double si_sdr_unclamped(const Eigen::Ref<const Eigen::VectorXd> &est,
                        const Eigen::Ref<const Eigen::VectorXd> &ref) {
  require_same_length(est.size(), ref.size(), "si_sdr");
  const double rr = ref.squaredNorm();
  if (!(rr > 0.0)) throw DegenerateInputError("si_sdr: reference has zero energy");
  const Eigen::VectorXd s = (est.dot(ref) / rr) * ref;
  const double num = s.squaredNorm();
  const double den = (est - s).squaredNorm();
  if (den == 0.0) return num == 0.0 ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / den);
}

double si_sdr(const Eigen::Ref<const Eigen::VectorXd> &est,
              const Eigen::Ref<const Eigen::VectorXd> &ref) {
  return std::clamp(si_sdr_unclamped(est, ref), -kSiSdrClampDb, kSiSdrClampDb);
}

double stoi(const Eigen::Ref<const Eigen::VectorXd> &est,
            const Eigen::Ref<const Eigen::VectorXd> &ref, int sample_rate) {
  require_same_length(est.size(), ref.size(), "stoi");
  Eigen::VectorXd x, y;
  if (sample_rate == kSampleRate) {
    x = stoi_detail::resample_16k_to_10k(ref);
    y = stoi_detail::resample_16k_to_10k(est);
  } else if (sample_rate == kStoiRate) {
    x = ref;
    y = est;
  } else {
    throw ShapeError("stoi: unsupported sample rate " + std::to_string(sample_rate));
  }
  std::tie(x, y) = remove_silent_frames(x, y);

  static const Eigen::MatrixXd obm = stoi_detail::third_octave_bands();
  const Eigen::MatrixXd xb = band_envelopes(x, obm);
  const Eigen::MatrixXd yb = band_envelopes(y, obm);
  const Eigen::Index frames = xb.cols();
  if (frames < kSegment)
    throw DegenerateInputError("stoi: only " + std::to_string(frames) +
                               " frames after silence removal, need " +
                               std::to_string(kSegment));

  const double clip = 1.0 + std::pow(10.0, -kBetaDb / 20.0);
  double total = 0.0;
  const Eigen::Index segments = frames - kSegment + 1;
  for (Eigen::Index m = 0; m < segments; ++m) {
    for (int b = 0; b < kBands; ++b) {
      const Eigen::VectorXd xs = xb.row(b).segment(m, kSegment).transpose();
      const Eigen::VectorXd ys = yb.row(b).segment(m, kSegment).transpose();
      const double scale = xs.norm() / (ys.norm() + kEps);
      Eigen::ArrayXd yp = (ys.array() * scale).min(xs.array() * clip);
      Eigen::ArrayXd xc = xs.array();
      yp -= yp.mean();
      xc -= xc.mean();
      yp /= yp.matrix().norm() + kEps;
      xc /= xc.matrix().norm() + kEps;
      total += (yp * xc).sum();
    }
  }
  return total / double(segments * kBands);
}

std::string to_string(Condition c) { return c == Condition::kNoisy ? "noisy" : "enhanced"; }

double MetricReport::overall_stoi(Condition c) const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto &r : rows)
    if (r.condition == c) s += r.mean_stoi * double(r.count), n += r.count;
  return n ? s / double(n) : std::numeric_limits<double>::quiet_NaN();
}

double MetricReport::overall_sisdr(Condition c) const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto &r : rows)
    if (r.condition == c) s += r.mean_sisdr * double(r.count), n += r.count;
  return n ? s / double(n) : std::numeric_limits<double>::quiet_NaN();
}

MetricReport aggregate(const std::vector<MetricRecord> &records) {
  if (records.empty()) throw ConfigError("aggregate: no records");
  using Key = std::tuple<std::string, double, int>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto &r : records) {
    auto &g = groups[{r.noise, r.snr_db, int(r.condition)}];
    g.first.push_back(r.stoi);
    g.second.push_back(r.sisdr);
  }
  // Summing sorted values makes the means independent of input order.
  auto mean = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  };
  MetricReport report;
  for (auto &[key, g] : groups) {
    MetricRow row;
    row.noise = std::get<0>(key);
    row.snr_db = std::get<1>(key);
    row.condition = Condition(std::get<2>(key));
    row.mean_stoi = mean(g.first);
    row.mean_sisdr = mean(g.second);
    row.count = g.first.size();
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(std::ostream &os, const MetricReport &report) {
  os << "noise,snr_db,snr_group,condition,mean_stoi,mean_sisdr,count\n";
  os.precision(17);
  for (const auto &r : report.rows)
    os << r.noise << ',' << r.snr_db << ',' << (r.snr_group.empty() ? "-" : r.snr_group) << ','
       << to_string(r.condition) << ',' << r.mean_stoi
       << ',' << r.mean_sisdr << ',' << r.count << '\n';
}

void write_report_csv(const std::filesystem::path &path, const MetricReport &report) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path.string());
  write_report_csv(os, report);
  if (!os) throw FormatError("write failed: " + path.string());
}

}  // namespace snrd
