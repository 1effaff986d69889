// src/unet.cpp

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

#include "snrd/unet.hpp"

#include <cmath>

namespace snrd {

void ArchConfig::validate() const {
  auto fail = [](const std::string &field, const std::string &why) {
    throw ConfigError("arch." + field + ": " + why);
  };
  if (encoder_blocks < 1) fail("encoder_blocks", "must be at least 1");
  if (resampling_stages < 0) fail("resampling_stages", "must be non-negative");
  if (resampling_stages > encoder_blocks)
    fail("resampling_stages", "cannot exceed encoder_blocks");
  if (resampling_stages > 24) fail("resampling_stages", "too many stages");
  if (base_channels < 1) fail("base_channels", "must be positive");
  if (channel_step < 0) fail("channel_step", "must be non-negative");
  if (kernel_down < 1 || kernel_down % 2 == 0) fail("kernel_down", "must be a positive odd size");
  if (kernel_up < 1 || kernel_up % 2 == 0) fail("kernel_up", "must be a positive odd size");
  if (bottleneck_blocks < 0) fail("bottleneck_blocks", "must be non-negative");
  if (!(leaky_slope > 0 && leaky_slope < 1)) fail("leaky_slope", "must lie in (0, 1)");
}

ArchConfig ArchConfig::paper() { return ArchConfig{}; }

ArchConfig ArchConfig::toy() {
  ArchConfig a;
  a.encoder_blocks = 2;
  a.resampling_stages = 2;
  a.base_channels = 8;
  a.channel_step = 8;
  return a;
}

void to_json(nlohmann::json &j, const ArchConfig &a) {
  j = nlohmann::json{{"encoder_blocks", a.encoder_blocks},
                     {"resampling_stages", a.resampling_stages},
                     {"base_channels", a.base_channels},
                     {"channel_step", a.channel_step},
                     {"kernel_down", a.kernel_down},
                     {"kernel_up", a.kernel_up},
                     {"bottleneck_blocks", a.bottleneck_blocks},
                     {"leaky_slope", a.leaky_slope}};
}

void from_json(const nlohmann::json &j, ArchConfig &a) {
  if (!j.is_object()) throw ConfigError("arch: expected a JSON object");
  static const char *known[] = {"encoder_blocks", "resampling_stages", "base_channels",
                                "channel_step",   "kernel_down",       "kernel_up",
                                "bottleneck_blocks", "leaky_slope"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char *k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("arch." + it.key() + ": unknown field");
  }
  auto get_int = [&](const char *key, int &out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw ConfigError(std::string("arch.") + key + ": expected an integer");
    out = j[key].get<int>();
  };
  get_int("encoder_blocks", a.encoder_blocks);
  get_int("resampling_stages", a.resampling_stages);
  get_int("base_channels", a.base_channels);
  get_int("channel_step", a.channel_step);
  get_int("kernel_down", a.kernel_down);
  get_int("kernel_up", a.kernel_up);
  get_int("bottleneck_blocks", a.bottleneck_blocks);
  if (j.contains("leaky_slope")) {
    if (!j["leaky_slope"].is_number()) throw ConfigError("arch.leaky_slope: expected a number");
    a.leaky_slope = j["leaky_slope"].get<double>();
  }
  a.validate();
}

std::int64_t parameter_count(const ArchConfig &a) {
  auto block = [](std::int64_t cin, std::int64_t cout, std::int64_t k) {
    return cin * cout * k + 3 * cout;  // weight, bias, gamma, beta
  };
  const int e = a.encoder_blocks;
  std::int64_t n = 0;
  for (int i = 1; i <= e; ++i)
    n += block(i == 1 ? 1 : a.encoder_channels(i - 1), a.encoder_channels(i), a.kernel_down);
  for (int i = 0; i < a.bottleneck_blocks; ++i)
    n += block(i == 0 ? a.encoder_channels(e) : a.bottleneck_channels(), a.bottleneck_channels(),
               a.kernel_down);
  for (int j = 1; j <= e; ++j) {
    const int m = e + 1 - j;
    const int below = j == 1 ? a.bottleneck_output_channels() : a.encoder_channels(m + 1);
    n += block(below + a.encoder_channels(m), a.encoder_channels(m), a.kernel_up);
  }
  n += a.encoder_channels(1) + 1;
  return n;
}

}  // namespace snrd
