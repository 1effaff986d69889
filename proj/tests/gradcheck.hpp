// tests/gradcheck.hpp

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

// Central finite-difference oracle. It only evaluates the forward pass of the
// function under test; the adjoint code is never consulted for the expected
// values.

#ifndef SNRD_TESTS_GRADCHECK_HPP_
#define SNRD_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "snrd/graph.hpp"

namespace snrd::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<leaf>[<element>]"
  std::size_t checked = 0;
};

/// `loss_of` builds a graph over the leaves (bound with Graph::parameter) and
/// returns the scalar loss. Every element of every leaf with requires_grad is
/// perturbed by +-h; the error is |analytic - numeric| / max(1, |analytic|).
inline GradCheckResult check_gradients(
    std::vector<Tensor<double> *> leaves,
    const std::function<Var(Graph<double> &)> &loss_of, double h = 1e-5) {
  {
    Graph<double> g;
    g.backward(loss_of(g));
  }
  std::vector<Vector<double>> analytic;
  for (auto *leaf : leaves)
    analytic.push_back(leaf->grad ? *leaf->grad : Vector<double>::Zero(leaf->numel()));

  auto eval = [&] {
    Graph<double> g;
    return g.value(loss_of(g)).item();
  };
  GradCheckResult r;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    if (!leaves[l]->requires_grad) continue;
    auto &data = leaves[l]->data;
    for (Index i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double up = eval();
      data[i] = saved - h;
      const double down = eval();
      data[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[l][i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      ++r.checked;
      if (err > r.max_rel_error) {
        r.max_rel_error = err;
        r.worst = "leaf " + std::to_string(l) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

inline Tensor<double> random_tensor(const Shape &s, std::mt19937_64 &rng, double scale = 1.0,
                                    bool requires_grad = true) {
  std::normal_distribution<double> nd(0.0, scale);
  Tensor<double> t(s);
  for (Index i = 0; i < t.numel(); ++i) t.data[i] = nd(rng);
  t.requires_grad = requires_grad;
  return t;
}

}  // namespace snrd::testing

#endif  // SNRD_TESTS_GRADCHECK_HPP_
