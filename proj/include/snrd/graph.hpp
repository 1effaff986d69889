// snrd/graph.hpp

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

#ifndef SNRD_GRAPH_HPP_
#define SNRD_GRAPH_HPP_

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "snrd/tensor.hpp"

namespace snrd {

/// Handle to a value recorded on a Graph.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape. Nodes are appended in execution order, so the node
/// vector is already a topological order and backward is one reverse sweep.
///
/// A Graph is meant to live for one forward/backward pass: backward() may be
/// called once, after which the tape is spent.
template <typename Scalar>
class Graph {
 public:
  using Vec = Vector<Scalar>;
  /// Receives the adjoint of the node's output and pushes contributions to
  /// its inputs through accumulate().
  using Adjoint = std::function<void(const Vec &upstream, Graph &graph)>;

  /// Owns a copy of `value`; never tracked.
  Var constant(Tensor<Scalar> value) {
    Node n;
    n.owned = std::move(value);
    n.owned.requires_grad = false;
    n.owned.grad.reset();
    return push(std::move(n));
  }

  /// References an external tensor without tracking it. The tensor must
  /// outlive the graph.
  Var constant_ref(const Tensor<Scalar> &value) {
    Node n;
    n.external = &value;
    return push(std::move(n));
  }

  /// References an external tensor that receives its gradient on backward()
  /// when value.requires_grad is set. Binding the same tensor twice returns
  /// the same Var.
  Var parameter(Tensor<Scalar> &value) {
    if (auto it = leaf_index_.find(&value); it != leaf_index_.end())
      return it->second;
    Node n;
    n.external = &value;
    n.grad_sink = &value;
    n.tracks = value.requires_grad;
    Var v = push(std::move(n));
    leaf_index_.emplace(&value, v);
    return v;
  }

  /// Appends an op result. `adjoint` is dropped when no input is tracked.
  Var record(Tensor<Scalar> value, std::vector<Var> inputs, Adjoint adjoint) {
    Node n;
    n.owned = std::move(value);
    n.owned.requires_grad = false;
    for (Var in : inputs) n.tracks = n.tracks || tracks(in);
    if (n.tracks) {
      n.inputs = std::move(inputs);
      n.adjoint = std::move(adjoint);
    }
    return push(std::move(n));
  }

  const Tensor<Scalar> &value(Var v) const {
    const Node &n = nodes_.at(v.id);
    return n.external ? *n.external : n.owned;
  }
  const Shape &shape(Var v) const { return value(v).shape; }
  bool tracks(Var v) const { return nodes_.at(v.id).tracks; }
  std::size_t size() const { return nodes_.size(); }
  bool spent() const { return spent_; }

  /// Adds `contribution` to the adjoint of `v`; no-op for untracked nodes.
  void accumulate(Var v, const Eigen::Ref<const Vec> &contribution) {
    Node &n = nodes_.at(v.id);
    if (!n.tracks) return;
    if (adjoints_[v.id].size() == 0)
      adjoints_[v.id] = contribution;
    else
      adjoints_[v.id] += contribution;
  }

  /// Adjoint of an interior node after backward(); nullptr when the node is
  /// untracked or received no gradient.
  const Vec *adjoint(Var v) const {
    if (v.id >= adjoints_.size() || adjoints_[v.id].size() == 0) return nullptr;
    return &adjoints_[v.id];
  }

  /// Propagates d(loss)/d(node) to every tracked node and stores the result
  /// in the `grad` field of each parameter leaf (overwriting any old value).
  void backward(Var loss) {
    if (spent_) throw GraphError("backward called twice on the same graph");
    const Node &root = nodes_.at(loss.id);
    const Tensor<Scalar> &lv = value(loss);
    if (lv.numel() != 1)
      throw GraphError("backward needs a scalar loss, got shape " + lv.shape.str());
    if (!root.tracks)
      throw GraphError("loss is detached: no tracked input reaches it");
    spent_ = true;
    for (Node &n : nodes_)
      if (n.grad_sink && n.tracks) n.grad_sink->grad.reset();
    adjoints_.assign(nodes_.size(), Vec());
    adjoints_[loss.id] = Vec::Ones(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node &n = nodes_[i];
      if (!n.tracks || adjoints_[i].size() == 0) continue;
      if (n.adjoint) n.adjoint(adjoints_[i], *this);
      if (n.grad_sink) n.grad_sink->grad = adjoints_[i];
    }
  }

 private:
  struct Node {
    Tensor<Scalar> owned;
    const Tensor<Scalar> *external = nullptr;
    Tensor<Scalar> *grad_sink = nullptr;
    bool tracks = false;
    std::vector<Var> inputs;
    Adjoint adjoint;
  };

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
  std::vector<Vec> adjoints_;
  std::unordered_map<const Tensor<Scalar> *, Var> leaf_index_;
  bool spent_ = false;
};

}  // namespace snrd

#endif  // SNRD_GRAPH_HPP_
