// snrd/unet.hpp

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

// Time-domain U-Net shared by teachers and student.
//
// Topology for E encoder blocks, R resampling stages, bottleneck depth D:
//
//   encoder i = 1..E : conv(kernel_down) -> BN -> leaky ReLU, output C_i;
//                      the activation is kept as skip i, then blocks 1..R
//                      decimate by 2
//   bottleneck x D   : conv(kernel_down) -> BN -> leaky ReLU, C_E + step
//   decoder j = 1..E : mirrors encoder m = E + 1 - j. Blocks with m <= R first
//                      upsample by 2 (linear), then every block concatenates
//                      skip m and runs conv(kernel_up) -> BN -> leaky ReLU
//                      down to C_m channels
//   head             : conv(kernel 1) to one channel -> tanh
//
// with C_i = base_channels + channel_step * (i - 1).

#ifndef SNRD_UNET_HPP_
#define SNRD_UNET_HPP_

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "snrd/graph.hpp"
#include "snrd/ops.hpp"
#include "snrd/seed.hpp"

namespace snrd {

struct ArchConfig {
  int encoder_blocks = 12;
  int resampling_stages = 7;
  int base_channels = 48;
  int channel_step = 24;
  int kernel_down = 15;
  int kernel_up = 5;
  int bottleneck_blocks = 1;
  double leaky_slope = 0.1;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  int encoder_channels(int block) const { return base_channels + channel_step * (block - 1); }
  int bottleneck_channels() const { return encoder_channels(encoder_blocks) + channel_step; }
  /// Channels entering the first decoder block.
  int bottleneck_output_channels() const {
    return bottleneck_blocks > 0 ? bottleneck_channels() : encoder_channels(encoder_blocks);
  }
  /// Input length must be a multiple of this.
  std::int64_t time_divisor() const { return std::int64_t{1} << resampling_stages; }

  static ArchConfig paper();
  /// Depth-2 network for CI-sized runs.
  static ArchConfig toy();

  bool operator==(const ArchConfig &) const = default;
};

void to_json(nlohmann::json &j, const ArchConfig &a);
void from_json(const nlohmann::json &j, ArchConfig &a);

/// Trainable scalar count implied by the configuration (conv weights and
/// biases, BN gamma and beta; running statistics excluded).
std::int64_t parameter_count(const ArchConfig &arch);

template <typename Scalar>
struct ConvBlock {
  Tensor<Scalar> weight;  // [Cout, Cin, K]
  Tensor<Scalar> bias;    // [Cout]
  Tensor<Scalar> gamma;
  Tensor<Scalar> beta;
  Tensor<Scalar> running_mean;
  Tensor<Scalar> running_var;

  ConvBlock() = default;
  ConvBlock(Index cin, Index cout, Index k)
      : weight(Shape{cout, cin, k}),
        bias(Shape{cout}),
        gamma(Shape{cout}, Vector<Scalar>::Ones(cout)),
        beta(Shape{cout}),
        running_mean(Shape{cout}),
        running_var(Shape{cout}, Vector<Scalar>::Ones(cout)) {}
};

template <typename Scalar>
struct NamedTensor {
  std::string name;
  Tensor<Scalar> *tensor;
};

template <typename Scalar>
class Model {
 public:
  ArchConfig arch;
  std::vector<ConvBlock<Scalar>> encoder;
  std::vector<ConvBlock<Scalar>> bottleneck;
  std::vector<ConvBlock<Scalar>> decoder;
  Tensor<Scalar> head_weight;  // [1, C_1, 1]
  Tensor<Scalar> head_bias;    // [1]

  /// Zero-filled model with the right shapes (gamma = 1, running var = 1).
  static Model skeleton(const ArchConfig &arch) {
    arch.validate();
    Model m;
    m.arch = arch;
    const int e = arch.encoder_blocks;
    for (int i = 1; i <= e; ++i)
      m.encoder.emplace_back(i == 1 ? 1 : arch.encoder_channels(i - 1), arch.encoder_channels(i),
                             arch.kernel_down);
    for (int i = 0; i < arch.bottleneck_blocks; ++i)
      m.bottleneck.emplace_back(i == 0 ? arch.encoder_channels(e) : arch.bottleneck_channels(),
                                arch.bottleneck_channels(), arch.kernel_down);
    for (int j = 1; j <= e; ++j) {
      const int mirror = e + 1 - j;
      const int below = j == 1 ? arch.bottleneck_output_channels() : arch.encoder_channels(mirror + 1);
      m.decoder.emplace_back(below + arch.encoder_channels(mirror), arch.encoder_channels(mirror),
                             arch.kernel_up);
    }
    m.head_weight = Tensor<Scalar>(Shape{1, arch.encoder_channels(1), 1});
    m.head_bias = Tensor<Scalar>(Shape{1});
    return m;
  }

  /// Every tensor in checkpoint order: per block weight, bias, gamma, beta,
  /// running_mean, running_var for enc1..encE, bott1..bottD, dec1..decE, then
  /// head.weight and head.bias.
  std::vector<NamedTensor<Scalar>> state() {
    std::vector<NamedTensor<Scalar>> out;
    auto add_block = [&](const std::string &prefix, ConvBlock<Scalar> &b) {
      out.push_back({prefix + ".conv.weight", &b.weight});
      out.push_back({prefix + ".conv.bias", &b.bias});
      out.push_back({prefix + ".bn.gamma", &b.gamma});
      out.push_back({prefix + ".bn.beta", &b.beta});
      out.push_back({prefix + ".bn.running_mean", &b.running_mean});
      out.push_back({prefix + ".bn.running_var", &b.running_var});
    };
    for (std::size_t i = 0; i < encoder.size(); ++i) add_block("enc" + std::to_string(i + 1), encoder[i]);
    for (std::size_t i = 0; i < bottleneck.size(); ++i)
      add_block("bott" + std::to_string(i + 1), bottleneck[i]);
    for (std::size_t i = 0; i < decoder.size(); ++i) add_block("dec" + std::to_string(i + 1), decoder[i]);
    out.push_back({"head.weight", &head_weight});
    out.push_back({"head.bias", &head_bias});
    return out;
  }

  /// The subset of state() updated by the optimizer, same order.
  std::vector<NamedTensor<Scalar>> trainable() {
    std::vector<NamedTensor<Scalar>> out;
    for (auto &nt : state())
      if (nt.name.find("running_") == std::string::npos) out.push_back(nt);
    return out;
  }

  void set_trainable(bool on) {
    for (auto &nt : trainable()) {
      nt.tensor->requires_grad = on;
      if (!on) nt.tensor->grad.reset();
    }
  }

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out = Model<Other>::skeleton(arch);
    auto src = const_cast<Model &>(*this).state();
    auto dst = out.state();
    for (std::size_t i = 0; i < src.size(); ++i) {
      *dst[i].tensor = src[i].tensor->template cast<Other>();
      dst[i].tensor->requires_grad = src[i].tensor->requires_grad;
    }
    return out;
  }
};

/// Fan-in scaled uniform init, U(-sqrt(1/(Cin*K)), +sqrt(1/(Cin*K))), for
/// conv weights; zero biases, gamma = 1, beta = 0. Parameters are drawn from
/// splitmix64 streams keyed by (seed, tensor index, element index), so the
/// result does not depend on the scalar type or platform RNG.
template <typename Scalar>
Model<Scalar> build_model(const ArchConfig &arch, std::uint64_t seed) {
  Model<Scalar> m = Model<Scalar>::skeleton(arch);
  std::uint64_t tensor_index = 0;
  for (auto &nt : m.state()) {
    ++tensor_index;
    Tensor<Scalar> &t = *nt.tensor;
    if (t.shape.rank() != 3) continue;
    const double bound = std::sqrt(1.0 / double(t.shape[1] * t.shape[2]));
    const std::uint64_t stream = combine_seed(seed, tensor_index);
    for (Index i = 0; i < t.numel(); ++i) {
      const double u = unit_from_seed(combine_seed(stream, std::uint64_t(i)));
      t.data[i] = static_cast<Scalar>((2.0 * u - 1.0) * bound);
    }
  }
  m.set_trainable(true);
  return m;
}

namespace internal {

template <typename Scalar, typename M>
Var bind_tensor(Graph<Scalar> &g, M &owner, Tensor<Scalar> &t) {
  if constexpr (std::is_const_v<M>) {
    (void)owner;
    return g.constant_ref(t);
  } else {
    return g.parameter(t);
  }
}

template <typename Scalar, typename M, typename Block>
Var conv_block(Graph<Scalar> &g, M &model, Block &blk, Var x, Mode mode) {
  using Mutable = std::remove_const_t<Block>;
  Mutable &b = const_cast<Mutable &>(blk);
  Var h = conv1d(g, x, bind_tensor(g, model, b.weight), bind_tensor(g, model, b.bias));
  Tensor<Scalar> *rm = nullptr;
  Tensor<Scalar> *rv = nullptr;
  if constexpr (!std::is_const_v<M>) {
    rm = &b.running_mean;
    rv = &b.running_var;
  }
  h = batchnorm1d(g, h, bind_tensor(g, model, b.gamma), bind_tensor(g, model, b.beta), mode,
                  b.running_mean, b.running_var, rm, rv);
  return leaky_relu(g, h, static_cast<Scalar>(model.arch.leaky_slope));
}

}  // namespace internal

/// Runs the network on x = [B, 1, T]. With a non-const model, parameters are
/// bound as graph leaves (tracked if requires_grad) and train mode updates
/// BN running statistics; with a const model everything is a constant.
template <typename Scalar, typename M>
  requires std::is_same_v<std::remove_const_t<M>, Model<Scalar>>
Var forward(Graph<Scalar> &g, M &model, Var x, Mode mode) {
  const ArchConfig &arch = model.arch;
  const Shape &s = g.shape(x);
  if (s.rank() != 3 || s[1] != 1)
    throw ShapeError("forward: expected input [B,1,T], got " + s.str());
  if (s[2] % arch.time_divisor() != 0 || s[2] == 0)
    throw ShapeError("forward: time extent " + std::to_string(s[2]) +
                     " is not a positive multiple of " + std::to_string(arch.time_divisor()) +
                     " (2^resampling_stages)");

  std::vector<Var> skips;
  Var h = x;
  for (int i = 0; i < arch.encoder_blocks; ++i) {
    h = internal::conv_block(g, model, model.encoder[i], h, mode);
    skips.push_back(h);
    if (i < arch.resampling_stages) h = decimate2(g, h);
  }
  for (auto &blk : model.bottleneck) h = internal::conv_block(g, model, blk, h, mode);
  for (int j = 1; j <= arch.encoder_blocks; ++j) {
    const int mirror = arch.encoder_blocks + 1 - j;
    if (mirror <= arch.resampling_stages) h = upsample_linear2(g, h);
    const Var skip = skips[mirror - 1];
    if (g.shape(skip)[2] != g.shape(h)[2])
      throw ShapeError("forward: skip " + std::to_string(mirror) + " has length " +
                       std::to_string(g.shape(skip)[2]) + ", decoder has " +
                       std::to_string(g.shape(h)[2]));
    h = concat_channels(g, h, skip);
    h = internal::conv_block(g, model, model.decoder[j - 1], h, mode);
  }
  using Mutable = Model<Scalar>;
  Mutable &mm = const_cast<Mutable &>(model);
  h = conv1d(g, h, internal::bind_tensor(g, model, mm.head_weight),
             internal::bind_tensor(g, model, mm.head_bias));
  return tanh(g, h);
}

/// Inference-mode forward pass without gradient tracking.
template <typename Scalar>
Tensor<Scalar> infer(const Model<Scalar> &model, const Tensor<Scalar> &x) {
  Graph<Scalar> g;
  Var out = forward(g, model, g.constant_ref(x), Mode::kInfer);
  return g.value(out);
}

}  // namespace snrd

#endif  // SNRD_UNET_HPP_
