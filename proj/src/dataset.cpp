// src/dataset.cpp

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

#include "snrd/dataset.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "snrd/errors.hpp"
#include "snrd/parallel.hpp"
#include "snrd/seed.hpp"

namespace snrd {

namespace fs = std::filesystem;

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_from_string(const std::string &s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw FormatError("unknown split '" + s + "' (expected train, val or test)");
}

// ---- CorpusConfig -------------------------------------------------------------

void CorpusConfig::validate() const {
  const std::string p = "corpus '" + name + "': ";
  if (name.empty()) throw ConfigError("corpus.name: must not be empty");
  if (name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError(p + "name must not contain slashes or spaces");
  if (snr_set.empty()) throw ConfigError(p + "snr_set must not be empty");
  for (double s : snr_set)
    if (!std::isfinite(s)) throw ConfigError(p + "snr_set entries must be finite");
  if (clean_dirs.empty()) throw ConfigError(p + "clean_dirs must not be empty");
  if (noise_dirs.empty()) throw ConfigError(p + "noise_dirs must not be empty");
  if (pairing == Pairing::kGrid && count_per_pairing < 1)
    throw ConfigError(p + "count_per_pairing must be at least 1");
  if (pairing == Pairing::kSample && total_count < 1)
    throw ConfigError(p + "total_count must be at least 1 for sample pairing");
  if (clean_count && *clean_count < 1) throw ConfigError(p + "clean_count must be positive");
  double sum = 0.0;
  for (auto [split, f] : split_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError(p + "split fraction out of [0, 1]");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(p + "split fractions must sum to 1");
}

double CorpusConfig::snr_lo() const { return *std::min_element(snr_set.begin(), snr_set.end()); }
double CorpusConfig::snr_hi() const { return *std::max_element(snr_set.begin(), snr_set.end()); }

std::size_t CorpusConfig::expected_count(std::size_t n_clean, std::size_t n_noise) const {
  if (pairing == Pairing::kSample) return std::size_t(total_count);
  if (clean_count) n_clean = std::min<std::size_t>(n_clean, std::size_t(*clean_count));
  return n_clean * n_noise * snr_set.size() * std::size_t(count_per_pairing);
}

void to_json(nlohmann::json &j, const CorpusConfig &c) {
  auto paths = [](const std::vector<fs::path> &v) {
    std::vector<std::string> out;
    for (auto &p : v) out.push_back(p.string());
    return out;
  };
  nlohmann::json split = nlohmann::json::object();
  for (auto [s, f] : c.split_fractions) split[to_string(s)] = f;
  j = {{"name", c.name},
       {"clean_dirs", paths(c.clean_dirs)},
       {"noise_dirs", paths(c.noise_dirs)},
       {"snr_set", c.snr_set},
       {"pairing", c.pairing == Pairing::kGrid ? "grid" : "sample"},
       {"split", split},
       {"master_seed", c.master_seed}};
  if (c.pairing == Pairing::kGrid)
    j["count_per_pairing"] = c.count_per_pairing;
  else
    j["total_count"] = c.total_count;
  if (c.clean_count) j["clean_count"] = *c.clean_count;
}

void from_json(const nlohmann::json &j, CorpusConfig &c) {
  if (!j.is_object()) throw ConfigError("corpus: expected a JSON object");
  static const std::set<std::string> known = {"name",        "clean_dirs",        "noise_dirs",
                                              "snr_set",     "pairing",           "count_per_pairing",
                                              "total_count", "clean_count",       "split",
                                              "master_seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("corpus." + it.key() + ": unknown field");
  auto field = [&](const char *key) -> const nlohmann::json & {
    if (!j.contains(key)) throw ConfigError(std::string("corpus.") + key + ": missing");
    return j.at(key);
  };
  try {
    c = CorpusConfig{};
    c.name = field("name").get<std::string>();
    for (auto &p : field("clean_dirs")) c.clean_dirs.emplace_back(p.get<std::string>());
    for (auto &p : field("noise_dirs")) c.noise_dirs.emplace_back(p.get<std::string>());
    c.snr_set = field("snr_set").get<std::vector<double>>();
    const std::string pairing = j.value("pairing", "grid");
    if (pairing == "grid")
      c.pairing = Pairing::kGrid;
    else if (pairing == "sample")
      c.pairing = Pairing::kSample;
    else
      throw ConfigError("corpus.pairing: expected 'grid' or 'sample', got '" + pairing + "'");
    c.count_per_pairing = j.value("count_per_pairing", 1);
    c.total_count = j.value("total_count", 0);
    if (j.contains("clean_count")) c.clean_count = j.at("clean_count").get<int>();
    if (j.contains("split")) {
      c.split_fractions.clear();
      for (auto it = j.at("split").begin(); it != j.at("split").end(); ++it) {
        Split s;
        try {
          s = split_from_string(it.key());
        } catch (const FormatError &) {
          throw ConfigError("corpus.split." + it.key() + ": unknown split");
        }
        c.split_fractions[s] = it.value().get<double>();
      }
    }
    c.master_seed = j.value("master_seed", std::uint64_t(0));
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("corpus: ") + e.what());
  }
  c.validate();
}

void to_json(nlohmann::json &j, const SynthConfig &c) {
  j = nlohmann::json::object();
  j["teachers"] = c.teachers;
  if (c.student) j["student"] = *c.student;
  if (c.test) j["test"] = *c.test;
}

void from_json(const nlohmann::json &j, SynthConfig &c) {
  if (!j.is_object()) throw ConfigError("synth config: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "teachers" && it.key() != "student" && it.key() != "test")
      throw ConfigError(it.key() + ": unknown field");
  c = SynthConfig{};
  if (j.contains("teachers")) {
    if (!j["teachers"].is_array()) throw ConfigError("teachers: expected an array");
    for (auto &t : j["teachers"]) c.teachers.push_back(t.get<CorpusConfig>());
  }
  if (j.contains("student")) c.student = j["student"].get<CorpusConfig>();
  if (j.contains("test")) c.test = j["test"].get<CorpusConfig>();
  check_disjoint_hulls(c.teachers);
}

// ---- presets ----------------------------------------------------------------------

SynthConfig paper_synth_preset(const fs::path &train_clean_dir, const fs::path &train_noise_dir,
                               const fs::path &test_clean_dir, const fs::path &test_noise_dir,
                               std::uint64_t seed) {
  SynthConfig s;
  const std::vector<std::vector<double>> bands = {
      {-20, -17, -13, -11}, {-10, -7, -3, -1}, {0, 3, 7, 9}, {10, 13, 17, 20}};
  for (std::size_t i = 0; i < bands.size(); ++i) {
    CorpusConfig c;
    c.name = "teacher" + std::to_string(i + 1);
    c.clean_dirs = {train_clean_dir};
    c.noise_dirs = {train_noise_dir};
    c.snr_set = bands[i];
    c.clean_count = 950;
    c.split_fractions = {{Split::kTrain, 18000.0 / 19000.0}, {Split::kVal, 1000.0 / 19000.0}};
    c.master_seed = combine_seed(seed, i + 1);
    s.teachers.push_back(c);
  }
  CorpusConfig st;
  st.name = "student";
  st.clean_dirs = {train_clean_dir};
  st.noise_dirs = {train_noise_dir};
  st.snr_set = {-20, -10, 0, 10, 20};
  st.clean_count = 950;
  st.split_fractions = {{Split::kTrain, 22000.0 / 23750.0}, {Split::kVal, 1750.0 / 23750.0}};
  st.master_seed = combine_seed(seed, 100);
  s.student = st;
  CorpusConfig te;
  te.name = "test";
  te.clean_dirs = {test_clean_dir};
  te.noise_dirs = {train_noise_dir, test_noise_dir};
  te.snr_set = {-20, -15, -10, -5, 0, 5, 10, 15, 20};
  te.clean_count = 100;
  te.split_fractions = {{Split::kTest, 1.0}};
  te.master_seed = combine_seed(seed, 200);
  s.test = te;
  return s;
}

SynthConfig toy_synth_preset(const fs::path &root, std::uint64_t seed) {
  SynthConfig s;
  const std::vector<std::vector<double>> bands = {{-10, -5}, {5, 10}};
  for (std::size_t i = 0; i < bands.size(); ++i) {
    CorpusConfig c;
    c.name = "teacher" + std::to_string(i + 1);
    c.clean_dirs = {root / "clean_train"};
    c.noise_dirs = {root / "noise_train"};
    c.snr_set = bands[i];
    c.split_fractions = {{Split::kTrain, 0.75}, {Split::kVal, 0.25}};
    c.master_seed = combine_seed(seed, i + 1);
    s.teachers.push_back(c);
  }
  CorpusConfig st;
  st.name = "student";
  st.clean_dirs = {root / "clean_train"};
  st.noise_dirs = {root / "noise_train" / "band_a.wav"};
  st.snr_set = {-10, -5, 0, 5, 10};
  st.split_fractions = {{Split::kTrain, 0.8}, {Split::kVal, 0.2}};
  st.master_seed = combine_seed(seed, 100);
  s.student = st;
  CorpusConfig te;
  te.name = "test";
  te.clean_dirs = {root / "clean_test"};
  te.noise_dirs = {root / "noise_train" / "band_a.wav", root / "noise_test"};
  te.snr_set = {-20, -15, -10, -5, 0, 5, 10, 15, 20};
  te.split_fractions = {{Split::kTest, 1.0}};
  te.master_seed = combine_seed(seed, 200);
  s.test = te;
  return s;
}

// ---- manifests ------------------------------------------------------------------

std::vector<fs::path> list_wavs(const std::vector<fs::path> &dirs) {
  std::vector<fs::path> out;
  for (const auto &d : dirs) {
    std::error_code ec;
    if (fs::is_regular_file(d, ec)) {
      out.push_back(d);
      continue;
    }
    if (!fs::is_directory(d, ec)) throw ConfigError("source path does not exist: " + d.string());
    std::vector<fs::path> here;
    for (const auto &e : fs::directory_iterator(d))
      if (e.is_regular_file() && e.path().extension() == ".wav") here.push_back(e.path());
    std::sort(here.begin(), here.end());
    out.insert(out.end(), here.begin(), here.end());
  }
  return out;
}

namespace {

std::string snr_tag(double snr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", snr);
  return std::string(buf) + "dB";
}

std::vector<std::size_t> pick_clean(const CorpusConfig &c, const std::vector<fs::path> &clean) {
  std::vector<std::size_t> idx(clean.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (!c.clean_count || std::size_t(*c.clean_count) == clean.size()) return idx;
  if (std::size_t(*c.clean_count) > clean.size())
    throw ConfigError("corpus '" + c.name + "': clean_count " + std::to_string(*c.clean_count) +
                      " exceeds the " + std::to_string(clean.size()) + " clean files available");
  auto key = [&](std::size_t i) {
    return derive_seed(c.master_seed, "clean:" + clean[i].filename().string());
  };
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  idx.resize(std::size_t(*c.clean_count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Exact split sizes, then membership by rank of a per-id hash.
void assign_splits(const CorpusConfig &c, Manifest &m) {
  const std::size_t n = m.size();
  std::vector<std::pair<Split, std::size_t>> sizes;
  std::size_t used = 0;
  for (auto it = c.split_fractions.begin(); it != c.split_fractions.end(); ++it) {
    std::size_t k = std::next(it) == c.split_fractions.end()
                        ? n - used
                        : std::min<std::size_t>(n - used, std::size_t(std::llround(it->second * n)));
    sizes.emplace_back(it->first, k);
    used += k;
  }
  std::vector<std::size_t> order(n);
  std::vector<std::uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
    key[i] = derive_seed(c.master_seed, "split:" + m[i].id);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return key[a] != key[b] ? key[a] < key[b] : m[a].id < m[b].id;
  });
  std::size_t pos = 0;
  for (auto [split, k] : sizes)
    for (std::size_t j = 0; j < k; ++j) m[order[pos++]].split = split;
}

}  // namespace

Manifest build_manifest(const CorpusConfig &config, const std::vector<fs::path> &clean,
                        const std::vector<fs::path> &noise) {
  config.validate();
  if (clean.empty()) throw ConfigError("corpus '" + config.name + "': no clean WAV files found");
  if (noise.empty()) throw ConfigError("corpus '" + config.name + "': no noise WAV files found");
  const auto chosen = pick_clean(config, clean);

  Manifest m;
  auto add = [&](std::string id, const fs::path &c, const fs::path &n, double snr) {
    UtteranceRecord r;
    r.id = std::move(id);
    r.clean_path = c;
    r.noise_path = n;
    r.snr_db = snr;
    r.noise_offset_seed = derive_seed(config.master_seed, r.id);
    m.push_back(std::move(r));
  };
  if (config.pairing == Pairing::kGrid) {
    for (std::size_t ci : chosen)
      for (const auto &n : noise)
        for (double snr : config.snr_set)
          for (int k = 0; k < config.count_per_pairing; ++k) {
            std::string id = config.name + "_" + clean[ci].stem().string() + "_" +
                             n.stem().string() + "_" + snr_tag(snr);
            if (config.count_per_pairing > 1) id += "_" + std::to_string(k);
            add(std::move(id), clean[ci], n, snr);
          }
  } else {
    for (int i = 0; i < config.total_count; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%06d", i);
      const std::string id = config.name + "_" + buf;
      const std::uint64_t s = derive_seed(config.master_seed, "pair:" + id);
      const auto ci = chosen[uniform_from_seed(combine_seed(s, 1), chosen.size() - 1)];
      const auto ni = uniform_from_seed(combine_seed(s, 2), noise.size() - 1);
      const auto si = uniform_from_seed(combine_seed(s, 3), config.snr_set.size() - 1);
      add(id, clean[ci], noise[ni], config.snr_set[si]);
    }
  }
  std::set<std::string> seen;
  for (const auto &r : m)
    if (!seen.insert(r.id).second)
      throw ConfigError("corpus '" + config.name + "': duplicate record id " + r.id);
  assign_splits(config, m);
  return m;
}

Manifest build_corpus(const CorpusConfig &config) {
  config.validate();
  return build_manifest(config, list_wavs(config.clean_dirs), list_wavs(config.noise_dirs));
}

void check_disjoint_hulls(const std::vector<CorpusConfig> &configs) {
  for (const auto &c : configs) c.validate();
  for (std::size_t a = 0; a < configs.size(); ++a) {
    for (std::size_t b = a + 1; b < configs.size(); ++b) {
      const auto &x = configs[a], &y = configs[b];
      if (x.snr_lo() <= y.snr_hi() && y.snr_lo() <= x.snr_hi()) {
        std::ostringstream os;
        os << "teachers: SNR ranges of '" << x.name << "' [" << x.snr_lo() << ", " << x.snr_hi()
           << "] dB and '" << y.name << "' [" << y.snr_lo() << ", " << y.snr_hi()
           << "] dB overlap";
        throw ConfigError(os.str());
      }
    }
  }
}

std::vector<Manifest> build_teacher_corpora(const std::vector<CorpusConfig> &configs) {
  check_disjoint_hulls(configs);
  std::vector<Manifest> out;
  for (const auto &c : configs) out.push_back(build_corpus(c));
  return out;
}

Manifest build_student_corpus(const CorpusConfig &config) { return build_corpus(config); }
Manifest build_test_corpus(const CorpusConfig &config) { return build_corpus(config); }

namespace {

fs::path relative_to(const fs::path &p, const fs::path &base) {
  const fs::path abs_p = fs::absolute(p).lexically_normal();
  const fs::path abs_b = fs::absolute(base).lexically_normal();
  fs::path rel = abs_p.lexically_relative(abs_b);
  return rel.empty() ? abs_p : rel;
}

}  // namespace

void write_manifest(const fs::path &path, const Manifest &manifest) {
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  fs::create_directories(dir);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write manifest " + path.string());
  for (const auto &r : manifest) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["clean_path"] = relative_to(r.clean_path, dir).generic_string();
    j["noise_path"] = relative_to(r.noise_path, dir).generic_string();
    j["snr_db"] = r.snr_db;
    j["noise_offset_seed"] = r.noise_offset_seed;
    j["split"] = to_string(r.split);
    os << j.dump() << '\n';
  }
  if (!os) throw FormatError("write failed: " + path.string());
}

Manifest read_manifest(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open manifest " + path.string());
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  static const std::set<std::string> fields = {"id",     "clean_path",        "noise_path",
                                               "snr_db", "noise_offset_seed", "split"};
  Manifest m;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(where + "invalid JSON");
    }
    if (!j.is_object()) throw FormatError(where + "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!fields.count(it.key())) throw FormatError(where + "unexpected field '" + it.key() + "'");
    for (const auto &f : fields)
      if (!j.contains(f)) throw FormatError(where + "missing field '" + f + "'");
    UtteranceRecord r;
    try {
      r.id = j["id"].get<std::string>();
      fs::path c = j["clean_path"].get<std::string>();
      fs::path n = j["noise_path"].get<std::string>();
      r.clean_path = c.is_absolute() ? c : (dir / c).lexically_normal();
      r.noise_path = n.is_absolute() ? n : (dir / n).lexically_normal();
      r.snr_db = j["snr_db"].get<double>();
      if (!j["noise_offset_seed"].is_number_unsigned())
        throw FormatError(where + "noise_offset_seed must be a non-negative integer");
      r.noise_offset_seed = j["noise_offset_seed"].get<std::uint64_t>();
      r.split = split_from_string(j["split"].get<std::string>());
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(where + e.what());
    } catch (const FormatError &e) {
      throw FormatError(std::string(e.what()).rfind(where, 0) == 0 ? e.what() : where + e.what());
    }
    if (!std::isfinite(r.snr_db)) throw FormatError(where + "snr_db must be finite");
    if (r.id.empty() || r.id.find_first_of("/\\") != std::string::npos)
      throw FormatError(where + "invalid id '" + r.id + "'");
    if (!ids.insert(r.id).second) throw FormatError(where + "duplicate id " + r.id);
    m.push_back(std::move(r));
  }
  return m;
}

fs::path rendered_path(const fs::path &manifest_path, const UtteranceRecord &record) {
  return manifest_path.parent_path() / manifest_path.stem() / (record.id + ".wav");
}

std::vector<RenderLogEntry> render(const fs::path &manifest_path, const Manifest &manifest) {
  const fs::path out_dir = manifest_path.parent_path() / manifest_path.stem();
  fs::create_directories(out_dir);
  std::vector<RenderLogEntry> log(manifest.size());
  parallel_for(manifest.size(), [&](std::size_t i) {
    const auto &r = manifest[i];
    Waveform clean, noise;
    try {
      clean = read_wav(r.clean_path);
      noise = read_wav(r.noise_path);
    } catch (const FormatError &e) {
      throw FormatError("record " + r.id + ": " + e.what());
    }
    Mixture mix;
    try {
      mix = mix_at_snr(clean, noise, r.snr_db, r.noise_offset_seed);
    } catch (const NumericError &e) {
      throw NumericError("record " + r.id + ": " + e.what());
    }
    write_wav(rendered_path(manifest_path, r), mix.noisy);
    log[i] = {r.id, mix.gain, mix.measured_snr_db};
  });
  std::ofstream os(out_dir / "render_log.csv", std::ios::binary);
  if (!os) throw FormatError("cannot write " + (out_dir / "render_log.csv").string());
  os << "id,gain,measured_snr_db\n";
  os.precision(17);
  for (const auto &e : log) os << e.id << ',' << e.gain << ',' << e.measured_snr_db << '\n';
  return log;
}

std::string summarize(const Manifest &manifest) {
  std::map<std::pair<Split, double>, std::size_t> counts;
  std::map<Split, std::size_t> per_split;
  for (const auto &r : manifest) {
    ++counts[{r.split, r.snr_db}];
    ++per_split[r.split];
  }
  std::ostringstream os;
  os << manifest.size() << " records";
  for (auto [s, n] : per_split) os << ", " << n << " " << to_string(s);
  os << '\n';
  for (auto &[key, n] : counts)
    os << "  " << to_string(key.first) << " " << snr_tag(key.second) << ": " << n << '\n';
  return os.str();
}

// ---- toy audio ---------------------------------------------------------------------

ToyKind toy_kind_from_string(const std::string &s) {
  if (s == "tone") return ToyKind::kTone;
  if (s == "chirp") return ToyKind::kChirp;
  if (s == "noiseband") return ToyKind::kNoiseband;
  throw ConfigError("unknown toy audio kind '" + s + "'");
}

namespace {

double syllable_envelope(double t, double phase) {
  return 0.55 - 0.45 * std::cos(2.0 * std::numbers::pi * 4.0 * t + phase);
}

// Standard normal from two seeded uniforms (Box-Muller).
double gaussian(std::uint64_t seed, std::uint64_t i) {
  const double u1 = 1.0 - unit_from_seed(combine_seed(seed, 2 * i));
  const double u2 = unit_from_seed(combine_seed(seed, 2 * i + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Waveform synth_toy_audio(ToyKind kind, std::uint64_t seed, double duration_s, double f0_hz) {
  if (!(duration_s > 0)) throw ConfigError("toy audio: duration must be positive");
  const Eigen::Index n = Eigen::Index(std::llround(duration_s * kSampleRate));
  const double fs = kSampleRate;
  const double two_pi = 2.0 * std::numbers::pi;
  Waveform w;
  w.samples.setZero(n);
  const double phase = two_pi * unit_from_seed(combine_seed(seed, 11));
  if (kind == ToyKind::kTone || kind == ToyKind::kChirp) {
    const double f0 = f0_hz > 0 ? f0_hz : 100.0 + 200.0 * unit_from_seed(combine_seed(seed, 12));
    const double f1 = 1.8 * f0;
    const int harmonics = kind == ToyKind::kTone ? 6 : 4;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = double(i) / fs;
      // instantaneous phase of the fundamental
      const double th = kind == ToyKind::kTone
                            ? two_pi * f0 * t
                            : two_pi * (f0 * t + (f1 - f0) * t * t / (2.0 * duration_s));
      double v = 0.0;
      for (int k = 1; k <= harmonics; ++k) {
        if (k * std::max(f0, kind == ToyKind::kChirp ? f1 : f0) >= 0.45 * fs) break;
        v += std::sin(k * th + phase * k) / double(k * k);
      }
      w.samples[i] = syllable_envelope(t, phase) * v;
    }
    const double peak = w.samples.cwiseAbs().maxCoeff();
    if (peak > 0) w.samples *= 0.5 / peak;
    return w;
  }
  // noiseband
  const double lo = 100.0 + 1400.0 * unit_from_seed(combine_seed(seed, 13));
  const double hi = std::min(7900.0, lo + 500.0 + 3500.0 * unit_from_seed(combine_seed(seed, 14)));
  std::vector<double> white(n);
  for (Eigen::Index i = 0; i < n; ++i) white[i] = gaussian(seed, std::uint64_t(i));
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, white);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double f = double(std::min(b, n - b)) * fs / double(n);
    if (f < lo || f > hi) spec[b] = 0.0;
  }
  std::vector<double> out;
  fft.inv(out, spec);
  for (Eigen::Index i = 0; i < n; ++i) w.samples[i] = out[i];
  const double rms = std::sqrt(w.samples.squaredNorm() / double(n));
  if (rms > 0) w.samples *= 0.1 / rms;
  return w;
}

void write_toy_sources(const fs::path &root, std::uint64_t seed, double duration_s) {
  struct Item {
    const char *dir;
    std::string name;
    ToyKind kind;
  };
  const std::vector<Item> items = {
      {"clean_train", "spk0", ToyKind::kTone},  {"clean_train", "spk1", ToyKind::kChirp},
      {"clean_train", "spk2", ToyKind::kTone},  {"clean_train", "spk3", ToyKind::kChirp},
      {"clean_test", "tst0", ToyKind::kTone},   {"clean_test", "tst1", ToyKind::kChirp},
      {"noise_train", "band_a", ToyKind::kNoiseband},
      {"noise_train", "band_b", ToyKind::kNoiseband},
      {"noise_test", "band_c", ToyKind::kNoiseband}};
  for (const auto &it : items) {
    fs::create_directories(root / it.dir);
    const auto s = derive_seed(seed, std::string(it.dir) + "/" + it.name);
    write_wav(root / it.dir / (it.name + ".wav"), synth_toy_audio(it.kind, s, duration_s));
  }
}

}  // namespace snrd
