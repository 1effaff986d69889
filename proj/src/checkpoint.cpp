// src/checkpoint.cpp

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

#include "snrd/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <string>

namespace snrd {

namespace {

using Kind = CheckpointError::Kind;

void put_u32(std::vector<unsigned char> &out, std::uint32_t v) {
  unsigned char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

std::uint32_t crc_of(const unsigned char *p, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in slices.
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  const unsigned char *take(std::size_t n) {
    need(n);
    const unsigned char *p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw CheckpointError(Kind::kTruncated, "checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

template <typename Scalar>
std::vector<unsigned char> encode_checkpoint(const Model<Scalar> &model) {
  std::vector<unsigned char> out;
  out.insert(out.end(), {'S', 'N', 'R', 'D'});
  put_u32(out, kCheckpointVersion);
  const std::string arch = nlohmann::json(model.arch).dump();
  put_u32(out, static_cast<std::uint32_t>(arch.size()));
  out.insert(out.end(), arch.begin(), arch.end());
  for (const auto &nt : const_cast<Model<Scalar> &>(model).state()) {
    put_u32(out, static_cast<std::uint32_t>(nt.name.size()));
    out.insert(out.end(), nt.name.begin(), nt.name.end());
    const Shape &s = nt.tensor->shape;
    put_u32(out, static_cast<std::uint32_t>(s.rank()));
    for (int i = 0; i < s.rank(); ++i) put_u32(out, static_cast<std::uint32_t>(s[i]));
    for (Index i = 0; i < nt.tensor->numel(); ++i) {
      const float f = static_cast<float>(nt.tensor->data[i]);
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      out.insert(out.end(), b, b + 4);
    }
  }
  put_u32(out, crc_of(out.data(), out.size()));
  return out;
}

template <typename Scalar>
Model<Scalar> decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "SNRD", 4) != 0)
    throw CheckpointError(Kind::kBadMagic, "not a checkpoint: bad magic bytes");
  Reader r(bytes);
  r.take(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointError(Kind::kVersion, "checkpoint format version " + std::to_string(version) +
                                              " is not supported (this build reads version " +
                                              std::to_string(kCheckpointVersion) + ")");
  if (bytes.size() < 12)
    throw CheckpointError(Kind::kTruncated, "checkpoint truncated in header");
  const std::size_t payload = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + payload, 4);
  if (crc_of(bytes.data(), payload) != stored)
    throw CheckpointError(Kind::kChecksum, "checkpoint checksum mismatch (file is corrupt)");

  const std::uint32_t json_len = r.u32();
  ArchConfig arch;
  try {
    arch = nlohmann::json::parse(r.str(json_len)).get<ArchConfig>();
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(Kind::kShape, std::string("checkpoint architecture unreadable: ") + e.what());
  } catch (const ConfigError &e) {
    throw CheckpointError(Kind::kShape, std::string("checkpoint architecture invalid: ") + e.what());
  }

  Model<Scalar> model = Model<Scalar>::skeleton(arch);
  for (auto &nt : model.state()) {
    const std::string name = r.str(r.u32());
    if (name != nt.name)
      throw CheckpointError(Kind::kShape, "checkpoint tensor '" + name + "' where '" + nt.name +
                                              "' was expected");
    const std::uint32_t ndim = r.u32();
    const Shape &want = nt.tensor->shape;
    bool match = ndim == std::uint32_t(want.rank());
    std::vector<std::uint32_t> dims(ndim > 3 ? 0 : ndim);
    if (ndim > 3) match = false;
    for (auto &d : dims) d = r.u32();
    for (std::size_t i = 0; match && i < dims.size(); ++i) match = Index(dims[i]) == want[int(i)];
    if (!match)
      throw CheckpointError(Kind::kShape, "checkpoint tensor '" + name +
                                              "' has the wrong shape for its architecture (want " +
                                              want.str() + ")");
    const unsigned char *p = r.take(std::size_t(want.numel()) * 4);
    for (Index i = 0; i < want.numel(); ++i) {
      float f;
      std::memcpy(&f, p + 4 * i, 4);
      nt.tensor->data[i] = static_cast<Scalar>(f);
    }
  }
  if (r.pos() != payload)
    throw CheckpointError(Kind::kShape, "checkpoint has " + std::to_string(payload - r.pos()) +
                                            " unexpected trailing bytes");
  return model;
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename Scalar>
void save_checkpoint(const Model<Scalar> &model, const std::filesystem::path &path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw CheckpointError(Kind::kIo, "write failed: " + path.string());
}

template <typename Scalar>
Model<Scalar> load_checkpoint(const std::filesystem::path &path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_checkpoint<Scalar>(bytes);
  } catch (const CheckpointError &e) {
    throw CheckpointError(e.kind(), path.string() + ": " + e.what());
  }
}

template std::vector<unsigned char> encode_checkpoint(const Model<float> &);
template std::vector<unsigned char> encode_checkpoint(const Model<double> &);
template Model<float> decode_checkpoint(std::span<const unsigned char>);
template Model<double> decode_checkpoint(std::span<const unsigned char>);
template void save_checkpoint(const Model<float> &, const std::filesystem::path &);
template void save_checkpoint(const Model<double> &, const std::filesystem::path &);
template Model<float> load_checkpoint(const std::filesystem::path &);
template Model<double> load_checkpoint(const std::filesystem::path &);

}  // namespace snrd
