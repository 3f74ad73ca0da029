// cpcaug/audio/wav.hpp

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

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/core/error.hpp"

namespace cpcaug {

enum class WavFormat { kInt16, kFloat32 };

namespace wav_detail {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
  }
}

inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

inline std::int16_t to_int16(float v) {
  constexpr double kMax = 32767.0 / 32768.0;
  double x = std::clamp(static_cast<double>(v), -1.0, kMax);
  return static_cast<std::int16_t>(std::lround(x * 32768.0));
}

}  // namespace wav_detail

/// Parses a RIFF/WAVE image already in memory. `name` is used in messages.
inline AudioBuffer parse_wav(const std::vector<unsigned char>& bytes,
                             const std::string& name = "<memory>") {
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorKind::kFormat, name + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_size = get_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + 16 > bytes.size()) {
        fail(ErrorKind::kTruncated, name + ": truncated fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      format = get_u16(f);
      channels = get_u16(f + 2);
      rate = get_u32(f + 4);
      block_align = get_u16(f + 12);
      bits = get_u16(f + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40 || body + 40 > bytes.size()) {
          fail(ErrorKind::kTruncated, name + ": truncated extensible fmt");
        }
        format = get_u16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorKind::kFormat, name + ": data before fmt");
      const bool int16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!int16 && !float32) {
        fail(ErrorKind::kUnsupported,
             name + ": unsupported codec (format tag " + std::to_string(format) +
                 ", " + std::to_string(bits) + " bits); only 16-bit PCM and "
                 "32-bit float are read");
      }
      if (channels == 0 || rate == 0) {
        fail(ErrorKind::kFormat, name + ": zero channels or sample rate");
      }
      const std::size_t bytes_per_sample = bits / 8;
      if (block_align != channels * bytes_per_sample) {
        fail(ErrorKind::kFormat, name + ": inconsistent block alignment");
      }
      if (body + chunk_size > bytes.size() || chunk_size % block_align != 0) {
        fail(ErrorKind::kTruncated,
             name + ": data chunk declares " + std::to_string(chunk_size) +
                 " bytes but " + std::to_string(bytes.size() - body) +
                 " are present");
      }
      const std::size_t frames = chunk_size / block_align;
      std::vector<float> mono(frames);
      const unsigned char* d = bytes.data() + body;
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const unsigned char* s = d + (i * channels + c) * bytes_per_sample;
          if (int16) {
            acc += static_cast<std::int16_t>(get_u16(s)) / 32768.0;
          } else {
            acc += std::bit_cast<float>(get_u32(s));
          }
        }
        mono[i] = channels == 1 ? static_cast<float>(acc)
                                : static_cast<float>(acc / channels);
      }
      return AudioBuffer(std::move(mono), static_cast<int>(rate));
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  fail(have_fmt ? ErrorKind::kTruncated : ErrorKind::kFormat,
       name + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

/// Reads a 16-bit PCM or 32-bit float WAV; multichannel is averaged to mono.
inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorKind::kNotFound, path.string() + ": no such file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, path.string() + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_wav(bytes, path.string());
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer& buf,
                                             WavFormat format) {
  using namespace wav_detail;
  const bool is_float = format == WavFormat::kFloat32;
  const std::uint16_t bytes_per_sample = is_float ? 4 : 2;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(buf.size() * bytes_per_sample);
  const std::uint32_t fmt_size = is_float ? 18 : 16;
  const std::uint32_t fact_size = is_float ? 12 : 0;

  std::vector<unsigned char> out;
  out.reserve(44 + fact_size + data_size + 2);
  put_tag(out, "RIFF");
  put_u32(out, 4 + (8 + fmt_size) + fact_size + (8 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, fmt_size);
  put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()) * bytes_per_sample);
  put_u16(out, bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
  if (is_float) {
    put_u16(out, 0);  // cbSize
    put_tag(out, "fact");
    put_u32(out, 4);
    put_u32(out, static_cast<std::uint32_t>(buf.size()));
  }
  put_tag(out, "data");
  put_u32(out, data_size);
  for (float s : buf.samples()) {
    if (is_float) {
      put_u32(out, std::bit_cast<std::uint32_t>(s));
    } else {
      put_u16(out, static_cast<std::uint16_t>(to_int16(s)));
    }
  }
  return out;
}

/// Writes mono WAV. int16 clamps to [-1, 1 - 2^-15]; float32 is lossless.
inline void write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
                      WavFormat format = WavFormat::kFloat32) {
  const auto bytes = encode_wav(buf, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, path.string() + ": write failed");
}

inline WavFormat parse_wav_format(const std::string& name) {
  if (name == "int16") return WavFormat::kInt16;
  if (name == "float32") return WavFormat::kFloat32;
  fail(ErrorKind::kInvalidArgument, "unknown WAV sample format '" + name + "'");
}

}  // namespace cpcaug
