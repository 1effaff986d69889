// tests/test_unet.cpp

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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <zlib.h>

#include "gradcheck.hpp"
#include "snrd/checkpoint.hpp"
#include "snrd/unet.hpp"

namespace snrd {
namespace {

namespace fs = std::filesystem;

ArchConfig random_arch(std::mt19937_64 &rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  ArchConfig a;
  a.encoder_blocks = pick(1, 5);
  a.resampling_stages = pick(0, a.encoder_blocks);
  a.base_channels = pick(1, 6);
  a.channel_step = pick(0, 4);
  a.kernel_down = 2 * pick(0, 4) + 1;
  a.kernel_up = 2 * pick(0, 3) + 1;
  a.bottleneck_blocks = pick(0, 2);
  return a;
}

// Written out independently of ArchConfig's helpers.
std::int64_t count_by_hand(const ArchConfig &a) {
  std::vector<std::int64_t> ch;
  for (int i = 0; i < a.encoder_blocks; ++i) ch.push_back(a.base_channels + a.channel_step * i);
  std::int64_t n = 0, prev = 1;
  for (auto c : ch) {
    n += prev * c * a.kernel_down + 3 * c;
    prev = c;
  }
  for (int i = 0; i < a.bottleneck_blocks; ++i) {
    const std::int64_t c = ch.back() + a.channel_step;
    n += prev * c * a.kernel_down + 3 * c;
    prev = c;
  }
  for (auto it = ch.rbegin(); it != ch.rend(); ++it) {
    n += (prev + *it) * *it * a.kernel_up + 3 * *it;
    prev = *it;
  }
  return n + ch.front() + 1;
}

template <typename S>
std::int64_t instantiated_count(Model<S> &m) {
  std::int64_t n = 0;
  for (auto &nt : m.trainable()) n += nt.tensor->numel();
  return n;
}

TEST(Arch, PaperPresetChannelSchedule) {
  const ArchConfig a = ArchConfig::paper();
  EXPECT_EQ(a.encoder_blocks, 12);
  EXPECT_EQ(a.resampling_stages, 7);
  EXPECT_EQ(a.encoder_channels(1), 48);
  EXPECT_EQ(a.encoder_channels(2), 72);
  EXPECT_EQ(a.encoder_channels(12), 312);
  EXPECT_EQ(a.bottleneck_channels(), 336);
  EXPECT_EQ(a.leaky_slope, 0.1);
  auto m = Model<float>::skeleton(a);
  ASSERT_EQ(m.encoder.size(), 12u);
  ASSERT_EQ(m.decoder.size(), 12u);
  for (int i = 0; i < 12; ++i) EXPECT_EQ(m.encoder[i].weight.shape[0], 48 + 24 * i);
  // decoder j mirrors encoder 13 - j
  for (int j = 1; j <= 12; ++j) EXPECT_EQ(m.decoder[j - 1].weight.shape[0], 48 + 24 * (12 - j));
  EXPECT_EQ(instantiated_count(m), parameter_count(a));
  EXPECT_EQ(count_by_hand(a), parameter_count(a));
}

TEST(Arch, ToyPresetReducesTimeByFour) {
  const ArchConfig a = ArchConfig::toy();
  EXPECT_EQ(a.encoder_blocks, 2);
  EXPECT_EQ(a.time_divisor(), 4);
}

TEST(Arch, ValidationRejectsBadConfigs) {
  ArchConfig a;
  a.resampling_stages = 13;
  EXPECT_THROW(a.validate(), ConfigError);
  a = ArchConfig{};
  a.kernel_down = 4;
  EXPECT_THROW(a.validate(), ConfigError);
  a = ArchConfig{};
  a.base_channels = 0;
  EXPECT_THROW(a.validate(), ConfigError);
  EXPECT_THROW(nlohmann::json({{"encoder_blocks", 2}, {"bogus", 1}}).get<ArchConfig>(),
               ConfigError);
}

TEST(Arch, JsonRoundTrip) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    ArchConfig a = random_arch(rng);
    EXPECT_EQ(nlohmann::json(a).get<ArchConfig>(), a);
  }
}

TEST(Arch, ClosedFormCountMatchesInstantiatedModel) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 50; ++i) {
    ArchConfig a = random_arch(rng);
    auto m = Model<float>::skeleton(a);
    EXPECT_EQ(parameter_count(a), instantiated_count(m)) << nlohmann::json(a).dump();
    EXPECT_EQ(count_by_hand(a), instantiated_count(m)) << nlohmann::json(a).dump();
  }
}

TEST(Forward, PaperPresetKeepsShape) {
  auto m = build_model<float>(ArchConfig::paper(), 1);
  Tensor<float> x(Shape{2, 1, 16384});
  std::mt19937 rng(3);
  std::normal_distribution<float> nd(0.f, 0.1f);
  for (Index i = 0; i < x.numel(); ++i) x.data[i] = nd(rng);
  auto y = infer(m, x);
  EXPECT_EQ(y.shape, (Shape{2, 1, 16384}));
  EXPECT_TRUE(y.all_finite());
  EXPECT_LT(y.data.cwiseAbs().maxCoeff(), 1.0f);
}

TEST(Forward, ZeroHeadGivesZeroOutput) {
  auto m = build_model<double>(ArchConfig::toy(), 5);
  m.head_weight.data.setZero();
  m.head_bias.data.setZero();
  std::mt19937_64 rng(1);
  auto x = testing::random_tensor(Shape{2, 1, 64}, rng, 0.3, false);
  EXPECT_TRUE(infer(m, x).data.isZero(0.0));
}

TEST(Forward, IndivisibleLengthNamesDivisor) {
  auto m = Model<float>::skeleton(ArchConfig::paper());
  Tensor<float> x(Shape{1, 1, 16383});
  try {
    infer(m, x);
    FAIL();
  } catch (const ShapeError &e) {
    EXPECT_NE(std::string(e.what()).find("128"), std::string::npos) << e.what();
  }
}

TEST(Forward, ShapeRoundTripForRandomArchitectures) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    ArchConfig a = random_arch(rng);
    auto m = build_model<double>(a, i);
    for (Index k = 1; k <= 8; ++k) {
      const Index t = k * a.time_divisor();
      auto x = testing::random_tensor(Shape{2, 1, t}, rng, 0.5, false);
      Graph<double> g;
      // Train mode needs B*T >= 2 at every level; B = 2 guarantees it.
      Var y = forward(g, m, g.constant(x), Mode::kTrain);
      EXPECT_EQ(g.shape(y), x.shape);
      EXPECT_EQ(infer(m, x).shape, x.shape);
    }
  }
}

TEST(Forward, TrainModeUpdatesRunningStats) {
  auto m = build_model<double>(ArchConfig::toy(), 2);
  std::mt19937_64 rng(8);
  auto x = testing::random_tensor(Shape{2, 1, 32}, rng, 0.5, false);
  {
    Graph<double> g;
    forward(g, std::as_const(m), g.constant(x), Mode::kTrain);
  }
  EXPECT_TRUE(m.encoder[0].running_mean.data.isZero(0.0));
  Graph<double> g;
  forward(g, m, g.constant(x), Mode::kTrain);
  EXPECT_FALSE(m.encoder[0].running_mean.data.isZero(0.0));
}

TEST(Init, DeterministicPerSeed) {
  auto a = build_model<float>(ArchConfig::toy(), 11);
  auto b = build_model<float>(ArchConfig::toy(), 11);
  auto c = build_model<float>(ArchConfig::toy(), 12);
  EXPECT_EQ(encode_checkpoint(a), encode_checkpoint(b));
  EXPECT_NE(encode_checkpoint(a), encode_checkpoint(c));
  // fan-in bound
  const float bound = std::sqrt(1.0f / 15.0f);
  EXPECT_LE(a.encoder[0].weight.data.cwiseAbs().maxCoeff(), bound);
  EXPECT_TRUE(a.encoder[0].bias.data.isZero(0.0f));
  EXPECT_TRUE(a.encoder[0].gamma.data.isOnes(0.0f));
}

TEST(Gradients, ToyUNetMatchesFiniteDifferences) {
  ArchConfig a = ArchConfig::toy();
  a.base_channels = 4;
  a.channel_step = 4;
  for (int seed = 0; seed < 20; ++seed) {
    auto m = build_model<double>(a, 1000 + seed);
    std::mt19937_64 rng(seed);
    // Nonzero biases/affines so every parameter path is exercised.
    for (auto &nt : m.trainable())
      if (nt.tensor->shape.rank() == 1)
        nt.tensor->data += testing::random_tensor(nt.tensor->shape, rng, 0.1, false).data;
    auto x = testing::random_tensor(Shape{2, 1, 16}, rng, 0.5, false);
    auto y = testing::random_tensor(Shape{2, 1, 16}, rng, 0.5, false);
    std::vector<Tensor<double> *> leaves;
    for (auto &nt : m.trainable()) leaves.push_back(nt.tensor);
    auto r = testing::check_gradients(leaves, [&](Graph<double> &g) {
      // Train-mode output ignores the running stats, so updating them is harmless.
      return l2_half(g, forward(g, m, g.constant_ref(x), Mode::kTrain),
                     g.constant_ref(y));
    });
    EXPECT_EQ(r.checked, std::size_t(parameter_count(a)));
    EXPECT_LE(r.max_rel_error, 1e-6) << "seed " << seed << " worst " << r.worst;
  }
}

// ---- checkpoints -------------------------------------------------------------

fs::path tmp(const std::string &name) {
  fs::path d = fs::temp_directory_path() / ("snrd_unet_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d / name;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  auto m = build_model<float>(ArchConfig::toy(), 3);
  m.encoder[1].running_mean.data.setConstant(0.25f);
  save_checkpoint(m, tmp("a.ckpt"));
  auto loaded = load_checkpoint<float>(tmp("a.ckpt"));
  save_checkpoint(loaded, tmp("b.ckpt"));
  EXPECT_EQ(read_file_bytes(tmp("a.ckpt")), read_file_bytes(tmp("b.ckpt")));
  auto sa = m.state();
  auto sb = loaded.state();
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_EQ(sa[i].tensor->data, sb[i].tensor->data);
  EXPECT_EQ(loaded.arch, m.arch);
}

TEST(Checkpoint, EverySingleByteCorruptionIsDetected) {
  ArchConfig a = ArchConfig::toy();
  a.base_channels = 2;
  a.channel_step = 2;
  auto bytes = encode_checkpoint(build_model<float>(a, 9));
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= 0x5a;
    EXPECT_THROW(decode_checkpoint<float>(bad), CheckpointError) << "byte " << i;
  }
  auto payload = bytes;
  payload[bytes.size() / 2] ^= 1;
  try {
    decode_checkpoint<float>(payload);
    FAIL();
  } catch (const CheckpointError &e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kChecksum);
  }
}

void refresh_crc(std::vector<unsigned char> &b) {
  std::uint32_t crc = crc32(0L, b.data(), uInt(b.size() - 4));
  std::memcpy(b.data() + b.size() - 4, &crc, 4);
}

TEST(Checkpoint, DistinctErrorKinds) {
  auto bytes = encode_checkpoint(build_model<float>(ArchConfig::toy(), 9));
  auto kind_of = [](const std::vector<unsigned char> &b) {
    try {
      decode_checkpoint<float>(b);
    } catch (const CheckpointError &e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(CheckpointError::Kind::kIo, std::string("no error"));
  };
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(kind_of(magic).first, CheckpointError::Kind::kBadMagic);

  auto old = bytes;
  old[4] = 0;  // version 0
  refresh_crc(old);
  auto [k, msg] = kind_of(old);
  EXPECT_EQ(k, CheckpointError::Kind::kVersion);
  EXPECT_NE(msg.find("version 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("version 1"), std::string::npos) << msg;

  // Claim a wider first layer in the JSON header: the stored tensors no
  // longer fit the architecture.
  std::string json(bytes.begin() + 12, bytes.begin() + 12 + bytes[8]);
  auto pos = json.find("\"base_channels\":8");
  ASSERT_NE(pos, std::string::npos);
  json.replace(pos, 17, "\"base_channels\":9");
  auto shape = bytes;
  std::copy(json.begin(), json.end(), shape.begin() + 12);
  refresh_crc(shape);
  EXPECT_EQ(kind_of(shape).first, CheckpointError::Kind::kShape);

  EXPECT_THROW(load_checkpoint<float>(tmp("does_not_exist.ckpt")), CheckpointError);
}

}  // namespace
}  // namespace snrd
