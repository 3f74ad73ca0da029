// cpcaug/core/features.hpp

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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "cpcaug/core/error.hpp"

namespace cpcaug {

using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureLevel { kZ, kC };

inline const char* to_string(FeatureLevel l) { return l == FeatureLevel::kZ ? "z" : "c"; }

inline FeatureLevel parse_feature_level(const std::string& s) {
  if (s == "z") return FeatureLevel::kZ;
  if (s == "c") return FeatureLevel::kC;
  fail(ErrorKind::kInvalidArgument, "feature level must be 'z' or 'c', got '" + s + "'");
}

/// Time-major T x D frame embeddings.
struct FeatureSequence {
  FrameMatrix frames;
  double frame_rate = 100.0;
  FeatureLevel level = FeatureLevel::kC;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

// Feature files: <stem>.f32 holds T*D little-endian float32 values row by
// row; <stem>.json holds {"frame_rate", "dim", "frames", "level"}.

inline void write_features(const std::filesystem::path& stem, const FeatureSequence& f) {
  static_assert(std::endian::native == std::endian::little,
                "feature files assume a little-endian host");
  auto bin = stem;
  bin += ".f32";
  std::ofstream out(bin, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, bin.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(f.frames.data()),
            static_cast<std::streamsize>(f.frames.size() * sizeof(float)));
  if (!out) fail(ErrorKind::kIo, bin.string() + ": write failed");

  auto meta_path = stem;
  meta_path += ".json";
  std::ofstream meta(meta_path);
  if (!meta) fail(ErrorKind::kIo, meta_path.string() + ": cannot open for writing");
  meta << nlohmann::json{{"frame_rate", f.frame_rate},
                         {"dim", f.frames.cols()},
                         {"frames", f.frames.rows()},
                         {"level", to_string(f.level)}}
              .dump()
       << "\n";
}

inline FeatureSequence read_features(const std::filesystem::path& stem) {
  auto meta_path = stem;
  meta_path += ".json";
  std::ifstream meta(meta_path);
  if (!meta) fail(ErrorKind::kNotFound, meta_path.string() + ": missing");
  FeatureSequence f;
  Eigen::Index rows = 0, cols = 0;
  try {
    const auto j = nlohmann::json::parse(meta);
    f.frame_rate = j.at("frame_rate").get<double>();
    cols = j.at("dim").get<Eigen::Index>();
    rows = j.at("frames").get<Eigen::Index>();
    if (j.contains("level")) f.level = parse_feature_level(j.at("level").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, meta_path.string() + ": " + e.what());
  }
  require(f.frame_rate > 0 && rows >= 0 && cols > 0,
          meta_path.string() + ": bad shape or frame rate", ErrorKind::kFormat);

  auto bin = stem;
  bin += ".f32";
  std::ifstream in(bin, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorKind::kNotFound, bin.string() + ": missing");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const auto want = static_cast<std::size_t>(rows * cols) * sizeof(float);
  if (bytes != want) {
    fail(bytes < want ? ErrorKind::kTruncated : ErrorKind::kFormat,
         bin.string() + ": size " + std::to_string(bytes) + " does not match " +
             std::to_string(rows) + "x" + std::to_string(cols) + " float32");
  }
  in.seekg(0);
  f.frames.resize(rows, cols);
  in.read(reinterpret_cast<char*>(f.frames.data()), static_cast<std::streamsize>(want));
  return f;
}

}  // namespace cpcaug
