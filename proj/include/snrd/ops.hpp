// snrd/ops.hpp

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

// Differentiable operators used by the U-Net and its losses. Every op is a
// free function that reads its inputs from a Graph, records the output, and
// registers the adjoint. Reductions always run in a fixed index order so
// results are bit-reproducible for any worker count.

#ifndef SNRD_OPS_HPP_
#define SNRD_OPS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "snrd/graph.hpp"
#include "snrd/parallel.hpp"

namespace snrd {

enum class Mode { kTrain, kInfer };

namespace internal {

// Rough flop count above which a batched op fans out over batch entries.
inline constexpr double kParallelWork = 4e6;

inline bool worth_parallel(Index batch, double work) {
  return batch > 1 && work >= kParallelWork && worker_count() > 1;
}

template <typename Fn>
void for_each_item(Index batch, double work, Fn &&fn) {
  if (worth_parallel(batch, work)) {
    parallel_for(static_cast<std::size_t>(batch),
                 [&](std::size_t b) { fn(static_cast<Index>(b)); });
  } else {
    for (Index b = 0; b < batch; ++b) fn(b);
  }
}

// Splits weight [Cout, Cin, K] into K contiguous [Cout, Cin] taps.
template <typename Scalar>
std::vector<RowMatrix<Scalar>> split_taps(const Tensor<Scalar> &w) {
  const Index cout = w.shape[0], cin = w.shape[1], k = w.shape[2];
  std::vector<RowMatrix<Scalar>> taps(k, RowMatrix<Scalar>(cout, cin));
  for (Index co = 0; co < cout; ++co)
    for (Index ci = 0; ci < cin; ++ci)
      for (Index j = 0; j < k; ++j) taps[j](co, ci) = w.data[(co * cin + ci) * k + j];
  return taps;
}

}  // namespace internal

/// Same-padded 1-D cross-correlation:
///   out[b,co,t] = bias[co] + sum_{ci,k} w[co,ci,k] * in[b,ci,t+k-(K-1)/2]
/// with zeros outside [0,T).
template <typename Scalar>
Var conv1d(Graph<Scalar> &g, Var input, Var weight, Var bias) {
  const Tensor<Scalar> &x = g.value(input);
  const Tensor<Scalar> &w = g.value(weight);
  const Tensor<Scalar> &bv = g.value(bias);
  require_rank3(x.shape, "conv1d input");
  require_rank3(w.shape, "conv1d weight");
  const Index batch = x.batch(), cin = x.channels(), t_len = x.time();
  const Index cout = w.shape[0], k = w.shape[2];
  if (w.shape[1] != cin)
    throw ShapeError("conv1d: input has " + std::to_string(cin) +
                     " channels but weight expects " + std::to_string(w.shape[1]));
  if (k % 2 == 0) throw ShapeError("conv1d: kernel size must be odd, got " + std::to_string(k));
  if (bv.shape.rank() != 1 || bv.shape[0] != cout)
    throw ShapeError("conv1d: bias shape " + bv.shape.str() + " for " +
                     std::to_string(cout) + " output channels");
  const Index pad = (k - 1) / 2;
  const double work = 2.0 * double(cout) * double(cin) * double(k) * double(t_len);

  auto taps = internal::split_taps(w);
  Tensor<Scalar> out(Shape{batch, cout, t_len});
  internal::for_each_item(batch, work, [&](Index b) {
    auto ob = out.slice(b);
    auto xb = x.slice(b);
    ob.colwise() = bv.data;
    for (Index j = 0; j < k; ++j) {
      const Index s = j - pad;
      const Index t0 = std::max<Index>(0, -s);
      const Index len = t_len - std::abs(s);
      if (len <= 0) continue;
      ob.middleCols(t0, len).noalias() += taps[j] * xb.middleCols(t0 + s, len);
    }
  });

  return g.record(std::move(out), {input, weight, bias},
                  [input, weight, bias, batch, cin, cout, k, t_len, pad, work](
                      const Vector<Scalar> &up, Graph<Scalar> &gr) {
    const Tensor<Scalar> &x = gr.value(input);
    const Tensor<Scalar> &w = gr.value(weight);
    auto up_item = [&](Index b) {
      return Eigen::Map<const RowMatrix<Scalar>>(up.data() + b * cout * t_len, cout, t_len);
    };

    if (gr.tracks(bias)) {
      Vector<Scalar> db = Vector<Scalar>::Zero(cout);
      for (Index b = 0; b < batch; ++b) db += up_item(b).rowwise().sum();
      gr.accumulate(bias, db);
    }
    if (gr.tracks(weight)) {
      std::vector<std::vector<RowMatrix<Scalar>>> partial(batch);
      internal::for_each_item(batch, work, [&](Index b) {
        auto ub = up_item(b);
        auto xb = x.slice(b);
        auto &taps = partial[b];
        taps.assign(k, RowMatrix<Scalar>::Zero(cout, cin));
        for (Index j = 0; j < k; ++j) {
          const Index s = j - pad;
          const Index t0 = std::max<Index>(0, -s);
          const Index len = t_len - std::abs(s);
          if (len <= 0) continue;
          taps[j].noalias() += ub.middleCols(t0, len) * xb.middleCols(t0 + s, len).transpose();
        }
      });
      Vector<Scalar> dw = Vector<Scalar>::Zero(cout * cin * k);
      for (Index b = 0; b < batch; ++b)
        for (Index co = 0; co < cout; ++co)
          for (Index ci = 0; ci < cin; ++ci)
            for (Index j = 0; j < k; ++j) dw[(co * cin + ci) * k + j] += partial[b][j](co, ci);
      gr.accumulate(weight, dw);
    }
    if (gr.tracks(input)) {
      auto taps = internal::split_taps(w);
      Vector<Scalar> dx = Vector<Scalar>::Zero(batch * cin * t_len);
      internal::for_each_item(batch, work, [&](Index b) {
        Eigen::Map<RowMatrix<Scalar>> dxb(dx.data() + b * cin * t_len, cin, t_len);
        auto ub = up_item(b);
        for (Index j = 0; j < k; ++j) {
          const Index s = j - pad;
          const Index t0 = std::max<Index>(0, -s);
          const Index len = t_len - std::abs(s);
          if (len <= 0) continue;
          dxb.middleCols(t0 + s, len).noalias() += taps[j].transpose() * ub.middleCols(t0, len);
        }
      });
      gr.accumulate(input, dx);
    }
  });
}

/// x for x >= 0, slope*x otherwise. The derivative at exactly 0 is 1.
template <typename Scalar>
Var leaky_relu(Graph<Scalar> &g, Var input, Scalar slope) {
  const Tensor<Scalar> &x = g.value(input);
  Tensor<Scalar> out(x.shape, (x.data.array() >= Scalar(0)).select(x.data, slope * x.data));
  return g.record(std::move(out), {input},
                  [input, slope](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    const auto &xv = gr.value(input).data.array();
    Vector<Scalar> dx = (xv >= Scalar(0)).select(up.array(), slope * up.array()).matrix();
    gr.accumulate(input, dx);
  });
}

template <typename Scalar>
Var tanh(Graph<Scalar> &g, Var input) {
  const Tensor<Scalar> &x = g.value(input);
  Tensor<Scalar> out(x.shape, x.data.array().tanh().matrix());
  Vector<Scalar> y = out.data;
  return g.record(std::move(out), {input},
                  [input, y = std::move(y)](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    Vector<Scalar> dx = (up.array() * (Scalar(1) - y.array().square())).matrix();
    gr.accumulate(input, dx);
  });
}

struct BatchNormOptions {
  double eps = 1e-5;
  /// Weight of the old running value in the exponential moving average.
  double momentum = 0.99;
};

/// Per-channel batch normalization over the batch and time axes.
///
/// Train mode normalizes with the biased batch statistics and, when
/// `running_mean`/`running_var` are non-null, folds the batch statistics into
/// them. Infer mode normalizes with the running statistics instead.
template <typename Scalar>
Var batchnorm1d(Graph<Scalar> &g, Var input, Var gamma, Var beta, Mode mode,
                const Tensor<Scalar> &stored_mean, const Tensor<Scalar> &stored_var,
                Tensor<Scalar> *running_mean, Tensor<Scalar> *running_var,
                const BatchNormOptions &opts = {}) {
  const Tensor<Scalar> &x = g.value(input);
  require_rank3(x.shape, "batchnorm1d");
  const Index batch = x.batch(), ch = x.channels(), t_len = x.time();
  const Index n = batch * t_len;
  const Scalar eps = static_cast<Scalar>(opts.eps);
  for (Var p : {gamma, beta})
    if (g.shape(p).rank() != 1 || g.shape(p)[0] != ch)
      throw ShapeError("batchnorm1d: affine parameter shape " + g.shape(p).str() +
                       " for " + std::to_string(ch) + " channels");

  Vector<Scalar> mean(ch), var(ch);
  if (mode == Mode::kTrain) {
    if (n < 2)
      throw ShapeError("batchnorm1d: degenerate batch, B*T = " + std::to_string(n) +
                       " in train mode");
    mean.setZero();
    for (Index b = 0; b < batch; ++b) mean += x.slice(b).rowwise().sum();
    mean /= Scalar(n);
    var.setZero();
    for (Index b = 0; b < batch; ++b)
      var += (x.slice(b).colwise() - mean).array().square().matrix().rowwise().sum();
    var /= Scalar(n);
    if (running_mean && running_var) {
      const Scalar m = static_cast<Scalar>(opts.momentum);
      running_mean->data = m * running_mean->data + (Scalar(1) - m) * mean;
      running_var->data = m * running_var->data + (Scalar(1) - m) * var;
    }
  } else {
    mean = stored_mean.data;
    var = stored_var.data;
  }
  Vector<Scalar> inv_std = (var.array() + eps).rsqrt().matrix();
  const Vector<Scalar> &gm = g.value(gamma).data;
  const Vector<Scalar> &bt = g.value(beta).data;

  Tensor<Scalar> xhat(x.shape);
  Tensor<Scalar> out(x.shape);
  for (Index b = 0; b < batch; ++b) {
    auto xh = xhat.slice(b);
    xh = ((x.slice(b).colwise() - mean).array().colwise() * inv_std.array()).matrix();
    out.slice(b) = ((xh.array().colwise() * gm.array()).colwise() + bt.array()).matrix();
  }

  return g.record(std::move(out), {input, gamma, beta},
                  [input, gamma, beta, mode, batch, ch, t_len, n, xhat = std::move(xhat),
                   inv_std = std::move(inv_std)](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    auto up_item = [&](Index b) {
      return Eigen::Map<const RowMatrix<Scalar>>(up.data() + b * ch * t_len, ch, t_len);
    };
    Vector<Scalar> sum_up = Vector<Scalar>::Zero(ch);
    Vector<Scalar> sum_up_xhat = Vector<Scalar>::Zero(ch);
    for (Index b = 0; b < batch; ++b) {
      sum_up += up_item(b).rowwise().sum();
      sum_up_xhat += (up_item(b).array() * xhat.slice(b).array()).matrix().rowwise().sum();
    }
    gr.accumulate(beta, sum_up);
    gr.accumulate(gamma, sum_up_xhat);
    if (!gr.tracks(input)) return;
    const Vector<Scalar> &gm = gr.value(gamma).data;
    Vector<Scalar> dx(batch * ch * t_len);
    for (Index b = 0; b < batch; ++b) {
      Eigen::Map<RowMatrix<Scalar>> dxb(dx.data() + b * ch * t_len, ch, t_len);
      if (mode == Mode::kTrain) {
        // dx = gamma*inv_std/N * (N*up - sum(up) - xhat*sum(up*xhat))
        auto centered = (up_item(b).array() * Scalar(n)).colwise() - sum_up.array();
        auto corr = xhat.slice(b).array().colwise() * sum_up_xhat.array();
        Vector<Scalar> scale = (gm.array() * inv_std.array() / Scalar(n)).matrix();
        dxb = ((centered - corr).colwise() * scale.array()).matrix();
      } else {
        Vector<Scalar> scale = (gm.array() * inv_std.array()).matrix();
        dxb = (up_item(b).array().colwise() * scale.array()).matrix();
      }
    }
    gr.accumulate(input, dx);
  });
}

/// Keeps even time indices: out[t] = x[2t].
template <typename Scalar>
Var decimate2(Graph<Scalar> &g, Var input) {
  const Tensor<Scalar> &x = g.value(input);
  require_rank3(x.shape, "decimate2");
  const Index batch = x.batch(), ch = x.channels(), t_len = x.time();
  if (t_len % 2 != 0)
    throw ShapeError("decimate2: time extent must be even, got " + std::to_string(t_len));
  const Index half = t_len / 2;
  Tensor<Scalar> out(Shape{batch, ch, half});
  const Index rows = batch * ch;
  Eigen::Map<const RowMatrix<Scalar>> xm(x.data.data(), rows, t_len);
  Eigen::Map<RowMatrix<Scalar>> om(out.data.data(), rows, half);
  om = xm(Eigen::all, Eigen::seq(0, t_len - 1, 2));
  return g.record(std::move(out), {input},
                  [input, rows, t_len, half](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    Vector<Scalar> dx = Vector<Scalar>::Zero(rows * t_len);
    Eigen::Map<RowMatrix<Scalar>> dm(dx.data(), rows, t_len);
    Eigen::Map<const RowMatrix<Scalar>> um(up.data(), rows, half);
    dm(Eigen::all, Eigen::seq(0, t_len - 1, 2)) = um;
    gr.accumulate(input, dx);
  });
}

/// Doubles the time extent by midpoint interpolation:
///   out[2i] = x[i], out[2i+1] = (x[i] + x[i+1]) / 2, out[2T-1] = x[T-1].
template <typename Scalar>
Var upsample_linear2(Graph<Scalar> &g, Var input) {
  const Tensor<Scalar> &x = g.value(input);
  require_rank3(x.shape, "upsample_linear2");
  const Index batch = x.batch(), ch = x.channels(), t_len = x.time();
  if (t_len < 1) throw ShapeError("upsample_linear2: empty time axis");
  const Index rows = batch * ch;
  Tensor<Scalar> out(Shape{batch, ch, 2 * t_len});
  Eigen::Map<const RowMatrix<Scalar>> xm(x.data.data(), rows, t_len);
  Eigen::Map<RowMatrix<Scalar>> om(out.data.data(), rows, 2 * t_len);
  om(Eigen::all, Eigen::seq(0, 2 * t_len - 2, 2)) = xm;
  if (t_len > 1)
    om(Eigen::all, Eigen::seq(1, 2 * t_len - 3, 2)) =
        (xm.leftCols(t_len - 1) + xm.rightCols(t_len - 1)) * Scalar(0.5);
  om.col(2 * t_len - 1) = xm.col(t_len - 1);
  return g.record(std::move(out), {input},
                  [input, rows, t_len](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    Vector<Scalar> dx(rows * t_len);
    Eigen::Map<RowMatrix<Scalar>> dm(dx.data(), rows, t_len);
    Eigen::Map<const RowMatrix<Scalar>> um(up.data(), rows, 2 * t_len);
    dm = um(Eigen::all, Eigen::seq(0, 2 * t_len - 2, 2));
    if (t_len > 1) {
      RowMatrix<Scalar> mid = um(Eigen::all, Eigen::seq(1, 2 * t_len - 3, 2)) * Scalar(0.5);
      dm.leftCols(t_len - 1) += mid;
      dm.rightCols(t_len - 1) += mid;
    }
    dm.col(t_len - 1) += um.col(2 * t_len - 1);
    gr.accumulate(input, dx);
  });
}

/// Stacks `a` on channels [0,Ca) and `b` on [Ca,Ca+Cb).
template <typename Scalar>
Var concat_channels(Graph<Scalar> &g, Var a, Var b) {
  const Tensor<Scalar> &xa = g.value(a);
  const Tensor<Scalar> &xb = g.value(b);
  require_rank3(xa.shape, "concat_channels");
  require_rank3(xb.shape, "concat_channels");
  if (xa.batch() != xb.batch() || xa.time() != xb.time())
    throw ShapeError("concat_channels: cannot join " + xa.shape.str() + " and " +
                     xb.shape.str() + " (batch and time must match)");
  const Index batch = xa.batch(), t_len = xa.time(), ca = xa.channels(), cb = xb.channels();
  Tensor<Scalar> out(Shape{batch, ca + cb, t_len});
  for (Index i = 0; i < batch; ++i) {
    out.slice(i).topRows(ca) = xa.slice(i);
    out.slice(i).bottomRows(cb) = xb.slice(i);
  }
  return g.record(std::move(out), {a, b},
                  [a, b, batch, t_len, ca, cb](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    Vector<Scalar> da(batch * ca * t_len), db(batch * cb * t_len);
    for (Index i = 0; i < batch; ++i) {
      Eigen::Map<const RowMatrix<Scalar>> ui(up.data() + i * (ca + cb) * t_len, ca + cb, t_len);
      Eigen::Map<RowMatrix<Scalar>>(da.data() + i * ca * t_len, ca, t_len) = ui.topRows(ca);
      Eigen::Map<RowMatrix<Scalar>>(db.data() + i * cb * t_len, cb, t_len) = ui.bottomRows(cb);
    }
    gr.accumulate(a, da);
    gr.accumulate(b, db);
  });
}

/// Scalar 0.5 * sum((a - b)^2).
template <typename Scalar>
Var l2_half(Graph<Scalar> &g, Var a, Var b) {
  const Tensor<Scalar> &xa = g.value(a);
  const Tensor<Scalar> &xb = g.value(b);
  if (!(xa.shape == xb.shape))
    throw ShapeError("l2_half: shapes " + xa.shape.str() + " and " + xb.shape.str() + " differ");
  Vector<Scalar> diff = xa.data - xb.data;
  Scalar total(0);
  for (Index i = 0; i < diff.size(); ++i) total += diff[i] * diff[i];
  auto out = Tensor<Scalar>::scalar(Scalar(0.5) * total);
  return g.record(std::move(out), {a, b},
                  [a, b, diff = std::move(diff)](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    gr.accumulate(a, diff * up[0]);
    gr.accumulate(b, -diff * up[0]);
  });
}

/// wa*a + wb*b for same-shaped inputs.
template <typename Scalar>
Var weighted_sum(Graph<Scalar> &g, Var a, Scalar wa, Var b, Scalar wb) {
  const Tensor<Scalar> &xa = g.value(a);
  const Tensor<Scalar> &xb = g.value(b);
  if (!(xa.shape == xb.shape))
    throw ShapeError("weighted_sum: shapes " + xa.shape.str() + " and " + xb.shape.str() +
                     " differ");
  Tensor<Scalar> out(xa.shape, (wa * xa.data + wb * xb.data).eval());
  return g.record(std::move(out), {a, b},
                  [a, wa, b, wb](const Vector<Scalar> &up, Graph<Scalar> &gr) {
    gr.accumulate(a, wa * up);
    gr.accumulate(b, wb * up);
  });
}

}  // namespace snrd

#endif  // SNRD_OPS_HPP_
