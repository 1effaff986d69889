// snrd/tensor.hpp

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

#ifndef SNRD_TENSOR_HPP_
#define SNRD_TENSOR_HPP_

#include <Eigen/Dense>

#include <array>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>

#include "snrd/errors.hpp"

namespace snrd {

using Index = Eigen::Index;

/// Extents of a rank-0..3 array. Rank-3 tensors are laid out [batch, channels,
/// time] in row-major order, so time is the fastest-varying axis.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<Index> extents) {
    if (extents.size() > 3) throw ShapeError("tensor rank above 3");
    for (Index e : extents) {
      if (e < 0) throw ShapeError("negative extent");
      extents_[rank_++] = e;
    }
  }

  int rank() const { return rank_; }
  Index operator[](int axis) const { return extents_[axis]; }

  Index numel() const {
    Index n = 1;
    for (int i = 0; i < rank_; ++i) n *= extents_[i];
    return n;
  }

  bool operator==(const Shape &other) const {
    if (rank_ != other.rank_) return false;
    for (int i = 0; i < rank_; ++i)
      if (extents_[i] != other.extents_[i]) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < rank_; ++i) os << (i ? "," : "") << extents_[i];
    os << ']';
    return os.str();
  }

 private:
  std::array<Index, 3> extents_{};
  int rank_ = 0;
};

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct Tensor {
  Shape shape;
  Vector<Scalar> data;
  bool requires_grad = false;
  std::optional<Vector<Scalar>> grad;

  Tensor() : data(Vector<Scalar>::Zero(1)) {}
  explicit Tensor(const Shape &s) : shape(s), data(Vector<Scalar>::Zero(s.numel())) {}
  Tensor(const Shape &s, Vector<Scalar> values) : shape(s), data(std::move(values)) {
    if (data.size() != shape.numel())
      throw ShapeError("data length " + std::to_string(data.size()) +
                       " does not match shape " + shape.str());
  }
  Tensor(const Shape &s, std::initializer_list<Scalar> values)
      : Tensor(s, Eigen::Map<const Vector<Scalar>>(values.begin(),
                                                   static_cast<Index>(values.size()))) {}

  static Tensor scalar(Scalar v) {
    Tensor t{Shape{}};
    t.data[0] = v;
    return t;
  }

  Index numel() const { return data.size(); }
  Index batch() const { return shape[0]; }
  Index channels() const { return shape[1]; }
  Index time() const { return shape[2]; }

  Scalar item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape.str());
    return data[0];
  }

  /// [channels, time] view of one batch entry of a rank-3 tensor.
  Eigen::Map<RowMatrix<Scalar>> slice(Index b) {
    return {data.data() + b * shape[1] * shape[2], shape[1], shape[2]};
  }
  Eigen::Map<const RowMatrix<Scalar>> slice(Index b) const {
    return {data.data() + b * shape[1] * shape[2], shape[1], shape[2]};
  }

  void zero_grad() { grad.reset(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape, data.template cast<Other>());
    out.requires_grad = requires_grad;
    return out;
  }

  bool all_finite() const { return data.allFinite(); }
};

inline void require_rank3(const Shape &s, const char *op) {
  if (s.rank() != 3)
    throw ShapeError(std::string(op) + ": expected [B,C,T], got " + s.str());
}

}  // namespace snrd

#endif  // SNRD_TENSOR_HPP_
