// snrd/checkpoint.hpp

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

// Binary checkpoint layout (all integers little-endian u32):
//
//   "SNRD" | version | json_len | ArchConfig JSON
//   repeated in Model::state() order:
//     name_len | name | ndim | dims[ndim] | float32 data
//   CRC-32 (zlib polynomial) of every preceding byte
//
// Parameters are always stored as 32-bit floats.

#ifndef SNRD_CHECKPOINT_HPP_
#define SNRD_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "snrd/unet.hpp"

namespace snrd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename Scalar>
std::vector<unsigned char> encode_checkpoint(const Model<Scalar> &model);

/// Verifies magic, version, checksum, and every tensor name/shape against the
/// embedded ArchConfig; each failure is a CheckpointError of its own kind.
template <typename Scalar>
Model<Scalar> decode_checkpoint(std::span<const unsigned char> bytes);

template <typename Scalar>
void save_checkpoint(const Model<Scalar> &model, const std::filesystem::path &path);

template <typename Scalar>
Model<Scalar> load_checkpoint(const std::filesystem::path &path);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path &path);

}  // namespace snrd

#endif  // SNRD_CHECKPOINT_HPP_
