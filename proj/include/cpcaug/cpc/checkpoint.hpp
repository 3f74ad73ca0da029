// cpcaug/cpc/checkpoint.hpp

// Copyright 2026  The cpcaug Authors

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

// Checkpoint layout, all integers little-endian:
//   "CPCAUGCK" | u32 version | u32 header bytes | JSON header
//   | u64 parameter count | float32 parameters | u32 crc32 of all prior bytes

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <zlib.h>

#include <nlohmann/json.hpp>

#include "cpcaug/cpc/model.hpp"

namespace cpcaug {

inline constexpr char kCheckpointMagic[8] = {'C', 'P', 'C', 'A', 'U', 'G', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  CpcModel<float> model;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  nlohmann::json extra;  // free-form run metadata
};

namespace checkpoint_detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoints assume a little-endian host");

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& in, std::size_t& pos, const std::string& where) {
  if (in.size() - pos < sizeof(T)) fail(ErrorKind::kTruncated, where + ": truncated checkpoint");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline std::uint32_t crc(const unsigned char* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace checkpoint_detail

inline void save_checkpoint(const std::filesystem::path& path, const CpcModel<float>& model,
                            std::uint64_t seed, std::uint64_t step,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  using namespace checkpoint_detail;
  const std::string header =
      nlohmann::json{{"config", model.config()}, {"seed", seed}, {"step", step}, {"extra", extra}}
          .dump();
  std::vector<unsigned char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  put<std::uint64_t>(out, model.num_params());
  for (float v : model.params()) put<float>(out, v);
  put<std::uint32_t>(out, crc(out.data(), out.size()));

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, path.string() + ": cannot open for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorKind::kIo, path.string() + ": write failed");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  using namespace checkpoint_detail;
  const std::string where = path.string();
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kNotFound, where + ": cannot open checkpoint");
  const std::vector<unsigned char> in((std::istreambuf_iterator<char>(f)),
                                      std::istreambuf_iterator<char>());
  if (in.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(in.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    fail(ErrorKind::kFormat, where + ": not a cpcaug checkpoint");
  }
  std::size_t pos = sizeof(kCheckpointMagic);
  const auto version = get<std::uint32_t>(in, pos, where);
  if (version != kCheckpointVersion) {
    fail(ErrorKind::kUnsupported, where + ": checkpoint version " + std::to_string(version));
  }
  const auto header_len = get<std::uint32_t>(in, pos, where);
  if (in.size() - pos < header_len) fail(ErrorKind::kTruncated, where + ": truncated header");
  const std::string header(in.begin() + static_cast<std::ptrdiff_t>(pos),
                           in.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
  pos += header_len;
  const auto count = get<std::uint64_t>(in, pos, where);
  if ((in.size() - pos) / sizeof(float) < count ||
      in.size() - pos - count * sizeof(float) < sizeof(std::uint32_t)) {
    fail(ErrorKind::kTruncated, where + ": truncated parameters");
  }
  const std::size_t body_end = pos + count * sizeof(float);
  std::size_t crc_pos = body_end;
  const auto stored = get<std::uint32_t>(in, crc_pos, where);
  if (stored != crc(in.data(), body_end)) fail(ErrorKind::kFormat, where + ": CRC mismatch");
  if (crc_pos != in.size()) fail(ErrorKind::kFormat, where + ": trailing bytes");

  nlohmann::json h;
  CpcConfig cfg;
  try {
    h = nlohmann::json::parse(header);
    cfg = h.at("config").get<CpcConfig>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, where + ": bad header: " + e.what());
  }
  Checkpoint ck{CpcModel<float>(cfg), h.value("seed", std::uint64_t{0}),
                h.value("step", std::uint64_t{0}), h.value("extra", nlohmann::json::object())};
  if (ck.model.num_params() != count) {
    fail(ErrorKind::kFormat, where + ": parameter count does not match the config");
  }
  std::memcpy(ck.model.params().data(), in.data() + pos, count * sizeof(float));
  return ck;
}

}  // namespace cpcaug
