// src/distill.cpp

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

#include "snrd/distill.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "snrd/checkpoint.hpp"

namespace snrd {

namespace fs = std::filesystem;

std::size_t select_teacher(std::span<const SnrHull> hulls, double snr_db) {
  if (hulls.empty()) throw ConfigError("select_teacher: teacher bank is empty");
  if (!std::isfinite(snr_db)) throw ConfigError("select_teacher: SNR must be finite");
  std::size_t inside = hulls.size(), n_inside = 0;
  for (std::size_t i = 0; i < hulls.size(); ++i)
    if (hulls[i].contains(snr_db)) inside = i, ++n_inside;
  if (n_inside == 1) return inside;
  std::size_t best = 0;
  double best_d = std::abs(snr_db - hulls[0].midpoint());
  for (std::size_t i = 1; i < hulls.size(); ++i) {
    const double d = std::abs(snr_db - hulls[i].midpoint());
    if (d < best_d) best = i, best_d = d;  // strict: ties keep the lower teacher
  }
  return best;
}

void check_hulls(std::span<const SnrHull> hulls) {
  for (std::size_t i = 0; i < hulls.size(); ++i) {
    if (!(std::isfinite(hulls[i].lo_db) && std::isfinite(hulls[i].hi_db) &&
          hulls[i].lo_db <= hulls[i].hi_db))
      throw ConfigError("teacher " + std::to_string(i) + ": invalid SNR hull");
    if (i > 0 && hulls[i - 1].lo_db > hulls[i].lo_db)
      throw ConfigError("teacher hulls must be sorted by lower bound");
    for (std::size_t j = 0; j < i; ++j)
      if (hulls[j].lo_db <= hulls[i].hi_db && hulls[i].lo_db <= hulls[j].hi_db) {
        std::ostringstream os;
        os << "teacher hulls " << j << " [" << hulls[j].lo_db << ", " << hulls[j].hi_db
           << "] and " << i << " [" << hulls[i].lo_db << ", " << hulls[i].hi_db << "] overlap";
        throw ConfigError(os.str());
      }
  }
}

void DistillConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("distill.alpha: must lie in [0, 1]");
}

namespace {

bool is_run_dir(const fs::path &d) {
  return fs::is_regular_file(d / "config.json") && fs::exists(d / "checkpoints" / "model.ckpt");
}

template <typename Scalar>
TeacherEntry<Scalar> load_entry(const fs::path &run) {
  std::ifstream is(run / "config.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError((run / "config.json").string() + ": " + e.what());
  }
  if (!j.contains("teacher") || !j["teacher"].contains("snr_hull"))
    throw ConfigError((run / "config.json").string() + ": teacher.snr_hull missing");
  const auto &h = j["teacher"]["snr_hull"];
  if (!h.is_array() || h.size() != 2 || !h[0].is_number() || !h[1].is_number())
    throw ConfigError((run / "config.json").string() + ": teacher.snr_hull must be [lo, hi]");
  TeacherEntry<Scalar> e;
  e.id = j["teacher"].value("id", run.filename().string());
  e.checkpoint = run / "checkpoints" / "model.ckpt";
  e.model = load_checkpoint<Scalar>(e.checkpoint);
  e.hull = {h[0].get<double>(), h[1].get<double>()};
  return e;
}

}  // namespace

template <typename Scalar>
TeacherBank<Scalar> load_teacher_bank(const fs::path &dir) {
  if (!fs::is_directory(dir)) throw ConfigError("teacher directory not found: " + dir.string());
  TeacherBank<Scalar> bank;
  if (is_run_dir(dir)) {
    bank.entries.push_back(load_entry<Scalar>(dir));
  } else {
    std::vector<fs::path> runs;
    for (const auto &e : fs::directory_iterator(dir))
      if (e.is_directory() && is_run_dir(e.path())) runs.push_back(e.path());
    std::sort(runs.begin(), runs.end());
    for (const auto &r : runs) bank.entries.push_back(load_entry<Scalar>(r));
  }
  if (bank.entries.empty())
    throw ConfigError("no teacher runs (config.json + checkpoints/model.ckpt) under " +
                      dir.string());
  std::stable_sort(bank.entries.begin(), bank.entries.end(),
                   [](const auto &a, const auto &b) { return a.hull.lo_db < b.hull.lo_db; });
  const auto hulls = bank.hulls();
  check_hulls(hulls);
  return bank;
}

template TeacherBank<float> load_teacher_bank<float>(const fs::path &);
template TeacherBank<double> load_teacher_bank<double>(const fs::path &);

}  // namespace snrd
