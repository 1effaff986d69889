// tools/snrd.cpp

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

// Command-line front end: corpus synthesis, teacher/student training,
// enhancement and evaluation. Exit codes: 0 success, 2 configuration error,
// 3 input-format error, 4 runtime or numeric failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "snrd/dataset.hpp"
#include "snrd/errors.hpp"
#include "snrd/run.hpp"
#include "snrd/seed.hpp"

namespace fs = std::filesystem;
using namespace snrd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;
constexpr int kExitRuntime = 4;

nlohmann::json read_json(const fs::path &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

struct SynthArgs {
  std::string config, out, paper_sources;
  std::optional<std::uint64_t> seed;
  bool toy = false;
  bool no_render = false;
};

int cmd_synth(const SynthArgs &a) {
  const fs::path out = a.out;
  SynthConfig sc;
  const int sources = int(!a.config.empty()) + int(a.toy) + int(!a.paper_sources.empty());
  if (sources != 1) throw ConfigError("synth: give exactly one of --config, --toy, --paper-sources");
  if (a.toy) {
    const std::uint64_t seed = a.seed.value_or(0);
    write_toy_sources(out / "sources", seed);
    sc = toy_synth_preset(fs::absolute(out / "sources"), seed);
  } else if (!a.paper_sources.empty()) {
    const fs::path s = a.paper_sources;
    sc = paper_synth_preset(s / "clean_train", s / "noise_train", s / "clean_test",
                            s / "noise_test", a.seed.value_or(0));
  } else {
    sc = read_json(a.config).get<SynthConfig>();
    if (a.seed) {
      std::uint64_t k = 0;
      for (auto &t : sc.teachers) t.master_seed = combine_seed(*a.seed, ++k);
      if (sc.student) sc.student->master_seed = combine_seed(*a.seed, 100);
      if (sc.test) sc.test->master_seed = combine_seed(*a.seed, 200);
    }
  }
  check_disjoint_hulls(sc.teachers);
  fs::create_directories(out / "manifests");
  {
    std::ofstream os(out / "config.json");
    os << nlohmann::json(sc).dump(2) << '\n';
  }
  std::vector<std::pair<CorpusConfig, Manifest>> built;
  auto teachers = build_teacher_corpora(sc.teachers);
  for (std::size_t i = 0; i < teachers.size(); ++i) built.emplace_back(sc.teachers[i], teachers[i]);
  if (sc.student) built.emplace_back(*sc.student, build_student_corpus(*sc.student));
  if (sc.test) built.emplace_back(*sc.test, build_test_corpus(*sc.test));
  for (const auto &[cfg, m] : built) {
    const fs::path mp = out / "manifests" / (cfg.name + ".jsonl");
    write_manifest(mp, m);
    if (!a.no_render) render(mp, m);
    std::cout << cfg.name << ": " << summarize(m);
  }
  return 0;
}

struct TrainArgs {
  std::string config, manifest, teachers, out, precision;
  std::optional<std::uint64_t> seed;
  bool toy = false;
};

RunConfig resolve_run_config(const TrainArgs &a, bool teacher) {
  RunConfig c = a.toy ? (teacher ? RunConfig::toy_teacher() : RunConfig::toy_student())
                      : (teacher ? RunConfig::paper_teacher() : RunConfig::paper_student());
  if (!a.config.empty()) {
    nlohmann::json j = c;
    j.merge_patch(read_json(a.config));
    c = j.get<RunConfig>();
  }
  if (a.seed) {
    c.train.seed = *a.seed;
    c.init_seed = *a.seed;
  }
  if (!a.precision.empty()) c.train.precision = precision_from_string(a.precision);
  c.validate();
  return c;
}

int cmd_train(const TrainArgs &a, bool teacher) {
  const RunConfig c = resolve_run_config(a, teacher);
  RunSummary s;
  if (teacher) {
    s = run_train_teacher(c, a.manifest, a.out, &std::cout);
  } else {
    std::optional<fs::path> t;
    if (!a.teachers.empty()) t = fs::path(a.teachers);
    s = run_train_student(c, a.manifest, t, a.out, &std::cout);
  }
  std::cout << "mode=" << s.mode << " steps=" << s.steps << " epochs=" << s.epochs
            << " stop=" << s.stop_reason << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"snrd: SNR-routed multi-teacher distillation for waveform speech enhancement"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto *s = app.add_subcommand("synth", "build corpus manifests and render mixtures");
  s->add_option("--config", synth.config, "synthesis config JSON (teachers/student/test corpora)");
  s->add_flag("--toy", synth.toy, "generate synthetic sources and use the CI-sized recipe");
  s->add_option("--paper-sources", synth.paper_sources,
                "directory with clean_train/noise_train/clean_test/noise_test for the paper recipe");
  s->add_option("--out", synth.out, "output root")->required();
  s->add_option("--seed", synth.seed, "master seed");
  s->add_flag("--no-render", synth.no_render, "write manifests only");

  TrainArgs tt, ts;
  auto add_train = [&](CLI::App *sub, TrainArgs &t) {
    sub->add_option("--config", t.config, "run config JSON (arch/train/distill/teacher sections)");
    sub->add_option("--manifest", t.manifest, "rendered corpus manifest")->required();
    sub->add_option("--out", t.out, "run directory")->required();
    sub->add_option("--seed", t.seed, "training and init seed");
    sub->add_flag("--toy", t.toy, "start from the CI-sized presets");
    sub->add_option("--precision", t.precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
  };
  auto *tteach = app.add_subcommand("train-teacher", "train one SNR-band teacher");
  add_train(tteach, tt);
  auto *tstud = app.add_subcommand("train-student", "train the student (S2 with --teachers, else S1)");
  add_train(tstud, ts);
  tstud->add_option("--teachers", ts.teachers, "teacher run directory or directory of runs");

  std::string e_ckpt, e_in, e_out, e_prec = "f32";
  auto *enh = app.add_subcommand("enhance", "enhance one WAV file");
  enh->add_option("--checkpoint", e_ckpt)->required();
  enh->add_option("--in", e_in)->required();
  enh->add_option("--out", e_out)->required();
  enh->add_option("--precision", e_prec)->check(CLI::IsMember({"f32", "f64"}));

  std::string v_ckpt, v_manifest, v_out, v_prec = "f32";
  bool v_identity = false;
  auto *ev = app.add_subcommand("evaluate", "score a rendered test corpus");
  auto *ck = ev->add_option("--checkpoint", v_ckpt);
  auto *id = ev->add_flag("--identity", v_identity, "pass-through model (enhanced = noisy)");
  ck->excludes(id);
  ev->add_option("--manifest", v_manifest)->required();
  ev->add_option("--out", v_out, "report CSV")->required();
  ev->add_option("--precision", v_prec)->check(CLI::IsMember({"f32", "f64"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*tteach) return cmd_train(tt, true);
    if (*tstud) return cmd_train(ts, false);
    if (*enh) {
      run_enhance(e_ckpt, e_in, e_out, precision_from_string(e_prec));
      return 0;
    }
    if (*ev) {
      if (v_ckpt.empty() && !v_identity) throw ConfigError("evaluate: give --checkpoint or --identity");
      std::optional<fs::path> ckpt;
      if (!v_identity) ckpt = fs::path(v_ckpt);
      const MetricReport r = run_evaluate(ckpt, v_manifest, v_out, precision_from_string(v_prec));
      std::cout << "rows=" << r.rows.size() << " noisy: stoi " << r.overall_stoi(Condition::kNoisy)
                << " si-sdr " << r.overall_sisdr(Condition::kNoisy)
                << " | enhanced: stoi " << r.overall_stoi(Condition::kEnhanced) << " si-sdr "
                << r.overall_sisdr(Condition::kEnhanced) << "\n";
      return 0;
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError &e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
