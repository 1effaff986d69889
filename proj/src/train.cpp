// src/train.cpp

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

#include "snrd/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "snrd/adam.hpp"
#include "snrd/parallel.hpp"
#include "snrd/seed.hpp"

namespace snrd {

namespace fs = std::filesystem;

std::string to_string(Precision p) { return p == Precision::kF32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string &s) {
  if (s == "f32") return Precision::kF32;
  if (s == "f64") return Precision::kF64;
  throw ConfigError("precision: expected f32 or f64, got '" + s + "'");
}

// ---- TrainConfig ------------------------------------------------------------------

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size: must be at least 1");
  if (!(lr_initial > 0)) throw ConfigError("train.lr_initial: must be positive");
  if (!(beta1 >= 0 && beta1 < 1)) throw ConfigError("train.beta1: must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) throw ConfigError("train.beta2: must lie in [0, 1)");
  if (!(adam_eps > 0)) throw ConfigError("train.adam_eps: must be positive");
  if (lr_decay_epochs < 0) throw ConfigError("train.lr_decay_epochs: must be >= 0");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("train.lr_decay: must lie in (0, 1]");
  if (patience < 0) throw ConfigError("train.patience: must be >= 0");
  if (max_epochs < 1) throw ConfigError("train.max_epochs: must be at least 1");
  if (max_steps < 0) throw ConfigError("train.max_steps: must be >= 0");
  if (window < 1) throw ConfigError("train.window: must be positive");
  if (eval_every < 1) throw ConfigError("train.eval_every: must be at least 1");
}

double TrainConfig::lr_at_epoch(int epoch) const {
  if (lr_decay_epochs == 0) return lr_initial;
  return lr_initial * std::pow(lr_decay, double((epoch - 1) / lr_decay_epochs));
}

TrainConfig TrainConfig::teacher_preset() {
  TrainConfig c;
  c.lr_initial = 0.0002;
  c.lr_decay_epochs = 0;
  return c;
}

TrainConfig TrainConfig::student_preset() { return TrainConfig{}; }

TrainConfig TrainConfig::toy() {
  TrainConfig c;
  c.batch_size = 4;
  c.lr_initial = 0.002;
  c.lr_decay_epochs = 0;
  c.patience = 0;
  c.max_epochs = 20;
  c.window = 2048;
  c.eval_every = 10;
  return c;
}

void to_json(nlohmann::json &j, const TrainConfig &c) {
  j = {{"batch_size", c.batch_size},   {"beta1", c.beta1},
       {"beta2", c.beta2},             {"adam_eps", c.adam_eps},
       {"lr_initial", c.lr_initial},   {"lr_decay_epochs", c.lr_decay_epochs},
       {"lr_decay", c.lr_decay},       {"patience", c.patience},
       {"max_epochs", c.max_epochs},   {"max_steps", c.max_steps},
       {"window", c.window},           {"eval_every", c.eval_every},
       {"seed", c.seed},               {"precision", to_string(c.precision)}};
}

void from_json(const nlohmann::json &j, TrainConfig &c) {
  if (!j.is_object()) throw ConfigError("train: expected a JSON object");
  nlohmann::json defaults = c;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!defaults.contains(it.key())) throw ConfigError("train." + it.key() + ": unknown field");
  auto num = [&](const char *key, auto &out) {
    if (!j.contains(key)) return;
    using T = std::decay_t<decltype(out)>;
    const auto &v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(std::string("train.") + key + ": expected an integer");
    } else {
      if (!v.is_number()) throw ConfigError(std::string("train.") + key + ": expected a number");
    }
    out = v.get<T>();
  };
  num("batch_size", c.batch_size);
  num("beta1", c.beta1);
  num("beta2", c.beta2);
  num("adam_eps", c.adam_eps);
  num("lr_initial", c.lr_initial);
  num("lr_decay_epochs", c.lr_decay_epochs);
  num("lr_decay", c.lr_decay);
  num("patience", c.patience);
  num("max_epochs", c.max_epochs);
  num("max_steps", c.max_steps);
  num("window", c.window);
  num("eval_every", c.eval_every);
  num("seed", c.seed);
  if (j.contains("precision")) {
    if (!j["precision"].is_string()) throw ConfigError("train.precision: expected a string");
    c.precision = precision_from_string(j["precision"].get<std::string>());
  }
  c.validate();
}

void to_json(nlohmann::json &j, const DistillConfig &c) { j = {{"alpha", c.alpha}}; }

void from_json(const nlohmann::json &j, DistillConfig &c) {
  if (!j.is_object()) throw ConfigError("distill: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "alpha") throw ConfigError("distill." + it.key() + ": unknown field");
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) throw ConfigError("distill.alpha: expected a number");
    c.alpha = j["alpha"].get<double>();
  }
  c.validate();
}

// ---- data ---------------------------------------------------------------------------

ExampleSet load_examples(const fs::path &manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  ExampleSet out;
  for (const auto &r : m) {
    Example e;
    e.id = r.id;
    e.noise = r.noise_name();
    e.snr_db = r.snr_db;
    try {
      e.noisy = read_wav(rendered_path(manifest_path, r)).samples;
      e.clean = read_wav(r.clean_path).samples;
    } catch (const FormatError &err) {
      throw FormatError("record " + r.id + ": " + err.what());
    }
    if (e.noisy.size() != e.clean.size())
      throw FormatError("record " + r.id + ": rendered mixture has " +
                        std::to_string(e.noisy.size()) + " samples, clean source " +
                        std::to_string(e.clean.size()));
    switch (r.split) {
      case Split::kTrain: out.train.push_back(std::move(e)); break;
      case Split::kVal: out.val.push_back(std::move(e)); break;
      case Split::kTest: out.test.push_back(std::move(e)); break;
    }
  }
  return out;
}

void write_curves_csv(const fs::path &path, const std::vector<CurvePoint> &curves) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  os << "epoch,train_loss,val_loss,val_stoi,val_sisdr\n";
  os.precision(10);
  for (const auto &c : curves)
    os << c.epoch << ',' << c.train_loss << ',' << c.val_loss << ',' << c.val_stoi << ','
       << c.val_sisdr << '\n';
  if (!os) throw FormatError("write failed: " + path.string());
}

namespace {

// `length` samples of x starting at `offset`, wrapping cyclically.
Eigen::VectorXd cyclic_window(const Eigen::VectorXd &x, Eigen::Index offset, Eigen::Index length) {
  Eigen::VectorXd out(length);
  for (Eigen::Index i = 0; i < length; ++i) out[i] = x[(offset + i) % x.size()];
  return out;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = uniform_from_seed(combine_seed(seed, i), i - 1);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

template <typename Scalar>
void put_row(Tensor<Scalar> &t, Index row, const Eigen::VectorXd &v) {
  t.data.segment(row * v.size(), v.size()) = v.cast<Scalar>();
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct ValScores {
  double loss = 0, stoi = 0, sisdr = 0;
};

template <typename Scalar>
ValScores validate_model(const Model<Scalar> &model, const std::vector<Example> &val, int window) {
  if (val.empty()) return {nan(), nan(), nan()};
  std::vector<double> loss(val.size()), st(val.size()), sd(val.size());
  parallel_for(val.size(), [&](std::size_t i) {
    const Eigen::VectorXd y = enhance(model, val[i].noisy, window);
    loss[i] = 0.5 * (y - val[i].clean).squaredNorm() / double(y.size());
    try {
      st[i] = stoi(y, val[i].clean);
    } catch (const DegenerateInputError &) {
      st[i] = nan();
    }
    try {
      sd[i] = si_sdr(y, val[i].clean);
    } catch (const DegenerateInputError &) {
      sd[i] = nan();
    }
  });
  ValScores s;
  for (std::size_t i = 0; i < val.size(); ++i) {
    s.loss += loss[i];
    s.stoi += st[i];
    s.sisdr += sd[i];
  }
  const double n = double(val.size());
  return {s.loss / n, s.stoi / n, s.sisdr / n};
}

}  // namespace

template <typename Scalar>
TrainResult<Scalar> train(Model<Scalar> model, const std::vector<Example> &train_set,
                          const std::vector<Example> &val_set, const TrainConfig &cfg,
                          double alpha, const TeacherBank<Scalar> *bank, std::ostream *log) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("train: no training examples");
  if (cfg.window % model.arch.time_divisor() != 0)
    throw ConfigError("train.window: " + std::to_string(cfg.window) +
                      " is not a multiple of " + std::to_string(model.arch.time_divisor()));
  if (!bank) alpha = 0.0;
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("distill.alpha: must lie in [0, 1]");

  std::vector<std::size_t> route(train_set.size(), 0);
  if (bank) {
    if (bank->entries.empty()) throw ConfigError("train: teacher bank is empty");
    for (const auto &t : bank->entries)
      if (cfg.window % t.model.arch.time_divisor() != 0)
        throw ConfigError("train.window: not a multiple of teacher " + t.id + "'s divisor " +
                          std::to_string(t.model.arch.time_divisor()));
    for (std::size_t i = 0; i < train_set.size(); ++i) route[i] = bank->select(train_set[i].snr_db);
  }

  model.set_trainable(true);
  TrainResult<Scalar> result;
  AdamState<Scalar> adam;
  AdamOptions opts;
  opts.beta1 = cfg.beta1;
  opts.beta2 = cfg.beta2;
  opts.eps = cfg.adam_eps;
  std::vector<std::string> names;
  for (auto &nt : model.trainable()) names.push_back(nt.name);

  const Index W = cfg.window;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  bool stop = false;
  for (int epoch = 1; epoch <= cfg.max_epochs && !stop; ++epoch) {
    opts.lr = cfg.lr_at_epoch(epoch);
    const std::uint64_t epoch_seed = combine_seed(cfg.seed, std::uint64_t(epoch));
    const auto order = permutation(train_set.size(), combine_seed(epoch_seed, 0x5eed));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
      const Index B = Index(end - start);
      Tensor<Scalar> x(Shape{B, 1, W}), y(Shape{B, 1, W}), t(Shape{B, 1, W});
      for (Index b = 0; b < B; ++b) {
        const Example &e = train_set[order[start + std::size_t(b)]];
        const Index off = segment_offset(e.noisy.size(), W, derive_seed(epoch_seed, e.id));
        put_row(x, b, cyclic_window(e.noisy, off, W));
        put_row(y, b, cyclic_window(e.clean, off, W));
      }
      if (bank && alpha > 0.0) {
        // One inference pass per routed teacher over its share of the batch.
        std::map<std::size_t, std::vector<Index>> groups;
        for (Index b = 0; b < B; ++b) groups[route[order[start + std::size_t(b)]]].push_back(b);
        for (const auto &[teacher, rows] : groups) {
          Tensor<Scalar> xs(Shape{Index(rows.size()), 1, W});
          for (std::size_t r = 0; r < rows.size(); ++r)
            xs.data.segment(Index(r) * W, W) = x.data.segment(rows[r] * W, W);
          const Tensor<Scalar> ys = infer(bank->entries[teacher].model, xs);
          for (std::size_t r = 0; r < rows.size(); ++r)
            t.data.segment(rows[r] * W, W) = ys.data.segment(Index(r) * W, W);
        }
      } else {
        t = y;
      }

      Graph<Scalar> g;
      const Var out = forward(g, model, g.constant_ref(x), Mode::kTrain);
      const Var loss = distill_loss(g, out, g.constant_ref(t), g.constant_ref(y), alpha);
      const double value = double(g.value(loss).item()) / double(B * W);
      if (!std::isfinite(value))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1));
      g.backward(loss);
      std::vector<Tensor<Scalar> *> params;
      for (auto &nt : model.trainable()) params.push_back(nt.tensor);
      try {
        adam_step<Scalar>(params, adam, opts, names);
      } catch (const NumericError &err) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + ": " + err.what());
      }
      loss_sum += value;
      ++batches;
      ++result.steps;
      result.last_batch_loss = value;
      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) {
        stop = true;
        result.stop_reason = "max_steps";
        break;
      }
    }
    result.epochs = epoch;
    if (epoch == cfg.max_epochs && !stop) result.stop_reason = "max_epochs";
    const bool last = stop || epoch == cfg.max_epochs;
    if (epoch % cfg.eval_every == 0 || last) {
      const ValScores v = validate_model(model, val_set, cfg.window);
      result.curves.push_back({epoch, loss_sum / double(batches), v.loss, v.stoi, v.sisdr});
      if (log)
        *log << "epoch " << epoch << " lr " << opts.lr << " train_loss "
             << loss_sum / double(batches) << " val_loss " << v.loss << " val_stoi " << v.stoi
             << " val_sisdr " << v.sisdr << '\n';
      if (v.loss < best_val) {
        best_val = v.loss;
        best_epoch = epoch;
      } else if (cfg.patience > 0 && epoch - best_epoch >= cfg.patience && !stop) {
        stop = true;
        result.stop_reason = "patience";
      }
    }
  }
  model.set_trainable(false);
  result.model = std::move(model);
  return result;
}

template <typename Scalar>
Eigen::VectorXd enhance(const Model<Scalar> &model, const Eigen::VectorXd &x, int window) {
  if (window < 1 || window % model.arch.time_divisor() != 0)
    throw ConfigError("enhance: window " + std::to_string(window) + " is not a multiple of " +
                      std::to_string(model.arch.time_divisor()));
  const Index n = x.size();
  if (n == 0) return Eigen::VectorXd();
  const Index windows = (n + window - 1) / window;
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(windows * window);
  padded.head(n) = x;
  Eigen::VectorXd out(windows * window);
  constexpr Index kChunk = 16;
  for (Index w0 = 0; w0 < windows; w0 += kChunk) {
    const Index k = std::min(kChunk, windows - w0);
    Tensor<Scalar> in(Shape{k, 1, window});
    in.data = padded.segment(w0 * window, k * window).cast<Scalar>();
    out.segment(w0 * window, k * window) = infer(model, in).data.template cast<double>();
  }
  return out.head(n);
}

std::string snr_group(double snr_db, const std::set<double> &train_snrs) {
  return train_snrs.count(snr_db) ? "seen" : "unseen";
}

template <typename Scalar>
MetricReport evaluate(const Model<Scalar> *model, const std::vector<Example> &test, int window,
                      const std::set<double> *train_snrs) {
  if (test.empty()) throw ConfigError("evaluate: no test records");
  std::vector<MetricRecord> recs(2 * test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const Example &e = test[i];
    const Eigen::VectorXd enhanced = model ? enhance(*model, e.noisy, window) : e.noisy;
    recs[2 * i] = {e.noise, e.snr_db, Condition::kNoisy, stoi(e.noisy, e.clean),
                   si_sdr(e.noisy, e.clean)};
    recs[2 * i + 1] = {e.noise, e.snr_db, Condition::kEnhanced, stoi(enhanced, e.clean),
                       si_sdr(enhanced, e.clean)};
  });
  MetricReport report = aggregate(recs);
  if (train_snrs)
    for (auto &row : report.rows) row.snr_group = snr_group(row.snr_db, *train_snrs);
  return report;
}

#define SNRD_INSTANTIATE(S)                                                                    \
  template TrainResult<S> train<S>(Model<S>, const std::vector<Example> &,                     \
                                   const std::vector<Example> &, const TrainConfig &, double,  \
                                   const TeacherBank<S> *, std::ostream *);                    \
  template Eigen::VectorXd enhance<S>(const Model<S> &, const Eigen::VectorXd &, int);         \
  template MetricReport evaluate<S>(const Model<S> *, const std::vector<Example> &, int,       \
                                    const std::set<double> *);
SNRD_INSTANTIATE(float)
SNRD_INSTANTIATE(double)
#undef SNRD_INSTANTIATE

}  // namespace snrd
