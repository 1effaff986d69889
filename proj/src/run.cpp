// src/run.cpp

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

#include "snrd/run.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "snrd/checkpoint.hpp"

namespace snrd {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  arch.validate();
  train.validate();
  distill.validate();
  if (teacher_hull && !(teacher_hull->lo_db <= teacher_hull->hi_db))
    throw ConfigError("teacher.snr_hull: lower bound exceeds upper bound");
  if (train.window % arch.time_divisor() != 0)
    throw ConfigError("train.window: " + std::to_string(train.window) +
                      " is not a multiple of " + std::to_string(arch.time_divisor()));
}

RunConfig RunConfig::paper_teacher() {
  RunConfig c;
  c.arch = ArchConfig::paper();
  c.train = TrainConfig::teacher_preset();
  return c;
}

RunConfig RunConfig::paper_student() {
  RunConfig c;
  c.arch = ArchConfig::paper();
  c.train = TrainConfig::student_preset();
  c.distill.alpha = 0.5;
  return c;
}

RunConfig RunConfig::toy_teacher() {
  RunConfig c;
  c.arch = ArchConfig::toy();
  c.train = TrainConfig::toy();
  return c;
}

RunConfig RunConfig::toy_student() {
  RunConfig c = toy_teacher();
  c.distill.alpha = 0.5;
  return c;
}

void to_json(nlohmann::json &j, const RunConfig &c) {
  j = {{"arch", c.arch}, {"train", c.train}, {"distill", c.distill}, {"init_seed", c.init_seed}};
  if (c.teacher_hull) j["teacher"] = {{"snr_hull", {c.teacher_hull->lo_db, c.teacher_hull->hi_db}}};
}

void from_json(const nlohmann::json &j, RunConfig &c) {
  if (!j.is_object()) throw ConfigError("run config: expected a JSON object");
  static const std::set<std::string> known = {"arch", "train", "distill", "teacher", "init_seed",
                                              "run"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(it.key() + ": unknown field");
  if (j.contains("arch")) c.arch = j["arch"].get<ArchConfig>();
  if (j.contains("train")) {
    TrainConfig t = c.train;
    from_json(j["train"], t);
    c.train = t;
  }
  if (j.contains("distill")) {
    DistillConfig d = c.distill;
    from_json(j["distill"], d);
    c.distill = d;
  }
  if (j.contains("init_seed")) {
    if (!j["init_seed"].is_number_unsigned())
      throw ConfigError("init_seed: expected a non-negative integer");
    c.init_seed = j["init_seed"].get<std::uint64_t>();
  }
  if (j.contains("teacher")) {
    const auto &t = j["teacher"];
    if (!t.is_object()) throw ConfigError("teacher: expected a JSON object");
    if (t.contains("snr_hull")) {
      const auto &h = t["snr_hull"];
      if (!h.is_array() || h.size() != 2 || !h[0].is_number() || !h[1].is_number())
        throw ConfigError("teacher.snr_hull: expected [lo_db, hi_db]");
      c.teacher_hull = SnrHull{h[0].get<double>(), h[1].get<double>()};
    }
  }
  c.validate();
}

RunConfig read_run_config(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return j.get<RunConfig>();
}

namespace {

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  os << text;
  if (!os) throw FormatError("write failed: " + path.string());
}

std::set<double> train_snrs(const std::vector<Example> &train) {
  std::set<double> s;
  for (const auto &e : train) s.insert(e.snr_db);
  return s;
}

// Writes to both the run log and the caller's stream.
class Tee {
 public:
  explicit Tee(std::ostream *extra) : extra_(extra) {}
  template <typename T>
  Tee &operator<<(const T &v) {
    buf_ << v;
    if (extra_) *extra_ << v;
    return *this;
  }
  std::string str() const { return buf_.str(); }
  std::ostream &stream() { return buf_; }

 private:
  std::ostringstream buf_;
  std::ostream *extra_;
};

template <typename Scalar>
RunSummary finish(TrainResult<Scalar> &&r, const std::string &mode, const fs::path &out,
                  const std::string &log_text) {
  save_checkpoint(r.model, out / "checkpoints" / "model.ckpt");
  write_curves_csv(out / "curves.csv", r.curves);
  std::ostringstream tail;
  tail << log_text << "done: " << r.steps << " steps, " << r.epochs << " epochs, stop "
       << r.stop_reason << '\n';
  write_text(out / "log.txt", tail.str());
  return {mode, r.steps, r.epochs, r.stop_reason, r.curves};
}

template <typename Scalar>
RunSummary teacher_impl(const RunConfig &config, const fs::path &manifest, const fs::path &out,
                        std::ostream *log) {
  ExampleSet data = load_examples(manifest);
  if (data.train.empty()) throw ConfigError("manifest " + manifest.string() + " has no train records");
  const auto snrs = train_snrs(data.train);
  SnrHull hull{*snrs.begin(), *snrs.rbegin()};
  if (config.teacher_hull) {
    for (const auto *set : {&data.train, &data.val})
      for (const auto &e : *set)
        if (!config.teacher_hull->contains(e.snr_db))
          throw ConfigError("record " + e.id + " has SNR " + std::to_string(e.snr_db) +
                            " dB outside the declared teacher.snr_hull");
    hull = *config.teacher_hull;
  }
  RunConfig frozen = config;
  frozen.teacher_hull = hull;
  nlohmann::json j = frozen;
  j["teacher"]["id"] = out.filename().string();
  j["run"] = {{"kind", "teacher"},
              {"mode", "teacher"},
              {"manifest", fs::absolute(manifest).lexically_normal().string()},
              {"train_snrs", std::vector<double>(snrs.begin(), snrs.end())}};
  fs::create_directories(out / "checkpoints");
  write_text(out / "config.json", j.dump(2) + "\n");

  Tee tee(log);
  tee << "mode=teacher hull=[" << hull.lo_db << ", " << hull.hi_db << "] train=" << data.train.size()
      << " val=" << data.val.size() << '\n';
  auto r = train<Scalar>(build_model<Scalar>(config.arch, config.init_seed), data.train, data.val,
                         config.train, 0.0, nullptr, &tee.stream());
  if (log)
    for (const auto &c : r.curves)
      *log << "epoch " << c.epoch << " train_loss " << c.train_loss << " val_loss " << c.val_loss
           << '\n';
  return finish(std::move(r), "teacher", out, tee.str());
}

template <typename Scalar>
RunSummary student_impl(const RunConfig &config, const fs::path &manifest,
                        const std::optional<fs::path> &teachers, const fs::path &out,
                        std::ostream *log) {
  ExampleSet data = load_examples(manifest);
  if (data.train.empty()) throw ConfigError("manifest " + manifest.string() + " has no train records");
  std::optional<TeacherBank<Scalar>> bank;
  if (teachers) bank = load_teacher_bank<Scalar>(*teachers);
  const std::string mode = bank ? "S2" : "S1";
  const auto snrs = train_snrs(data.train);

  nlohmann::json j = config;
  std::vector<nlohmann::json> tj;
  if (bank)
    for (const auto &t : bank->entries)
      tj.push_back({{"id", t.id},
                    {"checkpoint", fs::absolute(t.checkpoint).lexically_normal().string()},
                    {"snr_hull", {t.hull.lo_db, t.hull.hi_db}}});
  j["run"] = {{"kind", "student"},
              {"mode", mode},
              {"effective_alpha", bank ? config.distill.alpha : 0.0},
              {"manifest", fs::absolute(manifest).lexically_normal().string()},
              {"teachers", tj},
              {"train_snrs", std::vector<double>(snrs.begin(), snrs.end())}};
  fs::create_directories(out / "checkpoints");
  write_text(out / "config.json", j.dump(2) + "\n");

  Tee tee(log);
  tee << "mode=" << mode << " alpha=" << (bank ? config.distill.alpha : 0.0)
      << " train=" << data.train.size() << " val=" << data.val.size() << '\n';
  if (bank) {
    std::map<std::string, int> routed;
    for (const auto &e : data.train) ++routed[bank->entries[bank->select(e.snr_db)].id];
    for (const auto &[id, n] : routed) tee << "  teacher " << id << ": " << n << " records\n";
  }
  auto r = train<Scalar>(build_model<Scalar>(config.arch, config.init_seed), data.train, data.val,
                         config.train, config.distill.alpha, bank ? &*bank : nullptr,
                         &tee.stream());
  if (log)
    for (const auto &c : r.curves)
      *log << "epoch " << c.epoch << " train_loss " << c.train_loss << " val_loss " << c.val_loss
           << " val_sisdr " << c.val_sisdr << '\n';
  return finish(std::move(r), mode, out, tee.str());
}

std::optional<std::set<double>> train_snrs_near(const fs::path &checkpoint) {
  const fs::path cfg = checkpoint.parent_path().parent_path() / "config.json";
  if (!fs::is_regular_file(cfg)) return std::nullopt;
  try {
    std::ifstream is(cfg);
    auto j = nlohmann::json::parse(is);
    if (!j.contains("run") || !j["run"].contains("train_snrs")) return std::nullopt;
    auto v = j["run"]["train_snrs"].get<std::vector<double>>();
    return std::set<double>(v.begin(), v.end());
  } catch (const nlohmann::json::exception &) {
    return std::nullopt;
  }
}

}  // namespace

RunSummary run_train_teacher(const RunConfig &config, const fs::path &manifest,
                             const fs::path &out_dir, std::ostream *log) {
  config.validate();
  return config.train.precision == Precision::kF32
             ? teacher_impl<float>(config, manifest, out_dir, log)
             : teacher_impl<double>(config, manifest, out_dir, log);
}

RunSummary run_train_student(const RunConfig &config, const fs::path &manifest,
                             const std::optional<fs::path> &teachers, const fs::path &out_dir,
                             std::ostream *log) {
  config.validate();
  return config.train.precision == Precision::kF32
             ? student_impl<float>(config, manifest, teachers, out_dir, log)
             : student_impl<double>(config, manifest, teachers, out_dir, log);
}

void run_enhance(const fs::path &checkpoint, const fs::path &in_wav, const fs::path &out_wav,
                 Precision precision, int window) {
  const Waveform in = read_wav(in_wav);
  Waveform out;
  out.sample_rate = in.sample_rate;
  if (precision == Precision::kF32)
    out.samples = enhance(load_checkpoint<float>(checkpoint), in.samples, window);
  else
    out.samples = enhance(load_checkpoint<double>(checkpoint), in.samples, window);
  write_wav(out_wav, out);
}

MetricReport run_evaluate(const std::optional<fs::path> &checkpoint, const fs::path &test_manifest,
                          const fs::path &out_csv, Precision precision, int window) {
  ExampleSet data = load_examples(test_manifest);
  std::vector<Example> all = std::move(data.test);
  for (auto *extra : {&data.train, &data.val})
    for (auto &e : *extra) all.push_back(std::move(e));
  if (all.empty()) throw ConfigError("manifest " + test_manifest.string() + " is empty");
  std::optional<std::set<double>> seen;
  if (checkpoint) seen = train_snrs_near(*checkpoint);
  const std::set<double> *seen_ptr = seen ? &*seen : nullptr;
  MetricReport report;
  if (!checkpoint) {
    report = evaluate<float>(nullptr, all, window, seen_ptr);
  } else if (precision == Precision::kF32) {
    const auto m = load_checkpoint<float>(*checkpoint);
    report = evaluate(&m, all, window, seen_ptr);
  } else {
    const auto m = load_checkpoint<double>(*checkpoint);
    report = evaluate(&m, all, window, seen_ptr);
  }
  if (!out_csv.parent_path().empty()) fs::create_directories(out_csv.parent_path());
  write_report_csv(out_csv, report);
  return report;
}

}  // namespace snrd
