// snrd/seed.hpp

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

// Seed derivation shared by corpus synthesis and training. Everything random
// in the pipeline is drawn from these functions so that a record's noise
// offset, split and training windows depend only on (id, master seed).

#ifndef SNRD_SEED_HPP_
#define SNRD_SEED_HPP_

#include <cstdint>
#include <string_view>

namespace snrd {

/// One step of the splitmix64 output function.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-record seed: splitmix64(fnv1a64(id) ^ splitmix64(master)), truncated
/// to 53 bits so it survives a round trip through a JSON double.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view id) {
  return splitmix64(fnv1a64(id) ^ splitmix64(master)) & ((1ULL << 53) - 1);
}

/// Mixes a list of integers into one seed (order-sensitive).
constexpr std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, bound] from a seed; modulo bias is below 2^-40 for
/// the bounds used here.
constexpr std::uint64_t uniform_from_seed(std::uint64_t seed, std::uint64_t bound) {
  return splitmix64(seed) % (bound + 1);
}

/// Uniform real in [0, 1) from a seed (53 random bits).
constexpr double unit_from_seed(std::uint64_t seed) {
  return double(splitmix64(seed) >> 11) * 0x1.0p-53;
}

}  // namespace snrd

#endif  // SNRD_SEED_HPP_
