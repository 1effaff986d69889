// snrd/adam.hpp

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

#ifndef SNRD_ADAM_HPP_
#define SNRD_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snrd/tensor.hpp"

namespace snrd {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers, one pair per parameter, plus the step count.
template <typename Scalar>
struct AdamState {
  std::vector<Vector<Scalar>> m;
  std::vector<Vector<Scalar>> v;
  std::int64_t t = 0;
};

/// One bias-corrected Adam update over `params`. A parameter without a
/// gradient is treated as having a zero gradient. `names`, when given, is used
/// for diagnostics only.
template <typename Scalar>
void adam_step(std::span<Tensor<Scalar> *const> params, AdamState<Scalar> &state,
               const AdamOptions &opts, std::span<const std::string> names = {}) {
  if (!(opts.lr > 0)) throw ConfigError("adam: learning rate must be positive");
  if (state.m.empty()) {
    for (const Tensor<Scalar> *p : params) {
      state.m.push_back(Vector<Scalar>::Zero(p->numel()));
      state.v.push_back(Vector<Scalar>::Zero(p->numel()));
    }
  }
  if (state.m.size() != params.size())
    throw ShapeError("adam: state holds " + std::to_string(state.m.size()) +
                     " parameters, step got " + std::to_string(params.size()));

  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor<Scalar> &p = *params[i];
    if (state.m[i].size() != p.numel())
      throw ShapeError("adam: moment size mismatch for parameter " + std::to_string(i));
    if (p.grad && !p.grad->allFinite()) {
      Index bad = 0;
      while (bad < p.grad->size() && std::isfinite((*p.grad)[bad])) ++bad;
      std::string who = i < names.size() ? names[i] : "#" + std::to_string(i);
      throw NumericError("adam: non-finite gradient in parameter " + who + " at element " +
                         std::to_string(bad) + " (step " + std::to_string(state.t + 1) + ")");
    }
  }

  state.t += 1;
  const double c1 = 1.0 - std::pow(opts.beta1, double(state.t));
  const double c2 = 1.0 - std::pow(opts.beta2, double(state.t));
  const Scalar b1 = Scalar(opts.beta1), b2 = Scalar(opts.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<Scalar> &p = *params[i];
    Vector<Scalar> &m = state.m[i];
    Vector<Scalar> &v = state.v[i];
    if (p.grad) {
      m = b1 * m + (Scalar(1) - b1) * *p.grad;
      v = b2 * v + (Scalar(1) - b2) * p.grad->cwiseAbs2();
    } else {
      m *= b1;
      v *= b2;
    }
    auto m_hat = m.array() / Scalar(c1);
    auto v_hat = v.array() / Scalar(c2);
    p.data.array() -= Scalar(opts.lr) * m_hat / (v_hat.sqrt() + Scalar(opts.eps));
  }
}

}  // namespace snrd

#endif  // SNRD_ADAM_HPP_
