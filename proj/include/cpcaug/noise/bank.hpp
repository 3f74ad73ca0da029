// cpcaug/noise/bank.hpp

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
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpcaug/audio/buffer.hpp"
#include "cpcaug/audio/resample.hpp"
#include "cpcaug/audio/wav.hpp"
#include "cpcaug/core/parallel.hpp"
#include "cpcaug/core/rng.hpp"
#include "cpcaug/effects/basic.hpp"

namespace cpcaug {

struct BandSpec {
  double low_hz = 80.0;
  double high_hz = 240.0;

  friend bool operator==(const BandSpec&, const BandSpec&) = default;
};

/// The five bands delimited by the cutoffs 80, 240, 720 and 2160 Hz (each a
/// tripling of the previous), topped at 8 kHz.
inline constexpr std::array<BandSpec, 5> kCanonicalBands = {{
    {0.0, 80.0},
    {80.0, 240.0},
    {240.0, 720.0},
    {720.0, 2160.0},
    {2160.0, 8000.0},
}};

inline constexpr BandSpec kDefaultNoiseBand{80.0, 240.0};

/// Parses "LOW,HIGH".
inline BandSpec parse_band(const std::string& text) {
  const auto comma = text.find(',');
  require(comma != std::string::npos, "band must be LOW,HIGH, got '" + text + "'");
  BandSpec b;
  try {
    b.low_hz = std::stod(text.substr(0, comma));
    b.high_hz = std::stod(text.substr(comma + 1));
  } catch (const std::exception&) {
    fail(ErrorKind::kInvalidArgument, "band must be LOW,HIGH, got '" + text + "'");
  }
  require(b.low_hz >= 0.0 && b.low_hz < b.high_hz,
          "band needs 0 <= LOW < HIGH, got '" + text + "'");
  return b;
}

/// Where one noise draw comes from: a segment index and a start offset.
struct NoisePick {
  std::size_t segment = 0;
  std::size_t offset = 0;

  friend bool operator==(const NoisePick&, const NoisePick&) = default;
};

/// Immutable catalog of preprocessed noise segments, all at one sample rate,
/// all band-limited to `band` when one is set, none silent.
class NoiseBank {
 public:
  static constexpr double kTargetRmsDb = -25.0;
  static constexpr double kSilenceFloorDb = -60.0;
  static constexpr const char* kManifestName = "bank.json";

  struct Segment {
    std::string id;  // source file name
    AudioBuffer audio;
  };

  NoiseBank(std::vector<Segment> segments, std::optional<BandSpec> band,
            int sample_rate, std::string origin = {})
      : segments_(std::move(segments)),
        band_(band),
        sample_rate_(sample_rate),
        origin_(std::move(origin)) {
    require(sample_rate_ > 0, "NoiseBank: sample rate must be positive");
    require(!segments_.empty(), "NoiseBank: no segments", ErrorKind::kEmpty);
    for (const auto& s : segments_) {
      require(s.audio.sample_rate() == sample_rate_,
              "NoiseBank: segment '" + s.id + "' has a different sample rate");
      require(!s.audio.empty(), "NoiseBank: segment '" + s.id + "' is empty",
              ErrorKind::kEmpty);
    }
  }

  /// Ingests every *.wav in `dir` (sorted by name): downmix, resample to
  /// `target_rate`, optional band-pass, drop if below the silence floor, then
  /// normalize to kTargetRmsDb.
  static NoiseBank build(const std::filesystem::path& dir,
                         std::optional<BandSpec> band, int target_rate,
                         int threads = 1) {
    namespace fs = std::filesystem;
    require(target_rate > 0, "build_bank: target rate must be positive");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
      fail(ErrorKind::kNotFound, dir.string() + ": not a directory");
    }
    if (band) {
      // Validates the band against the target rate up front.
      (void)design_band_pass(band->low_hz, std::min(band->high_hz, target_rate / 2.0),
                             target_rate);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      fail(ErrorKind::kEmpty, dir.string() + ": no WAV files");
    }

    std::vector<Segment> raw(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
      raw[i] = Segment{files[i].filename().string(), read_wav(files[i])};
    });
    return from_buffers(std::move(raw), band, target_rate, threads, dir.string());
  }

  /// The ingest pipeline of build() applied to in-memory segments.
  static NoiseBank from_buffers(std::vector<Segment> raw, std::optional<BandSpec> band,
                                int target_rate, int threads = 1, std::string origin = {}) {
    require(target_rate > 0, "build_bank: target rate must be positive");
    if (band) {
      (void)design_band_pass(band->low_hz, std::min(band->high_hz, target_rate / 2.0),
                             target_rate);
    }
    if (raw.empty()) fail(ErrorKind::kEmpty, "build_bank: no noise sources");
    std::vector<std::optional<Segment>> ingested(raw.size());
    parallel_for(raw.size(), threads, [&](std::size_t i) {
      AudioBuffer audio = resample(raw[i].audio, target_rate);
      if (audio.empty()) return;
      if (band) {
        audio = band_pass(audio, band->low_hz,
                          std::min(band->high_hz, target_rate / 2.0));
      }
      const double level = rms_db(audio);
      if (!(level >= kSilenceFloorDb)) return;
      const double gain = std::pow(10.0, (kTargetRmsDb - level) / 20.0);
      std::vector<float> scaled(audio.size());
      const auto src = audio.samples();
      for (std::size_t n = 0; n < scaled.size(); ++n) {
        scaled[n] = static_cast<float>(src[n] * gain);
      }
      ingested[i] = Segment{std::move(raw[i].id), AudioBuffer(std::move(scaled), target_rate)};
    });

    std::vector<Segment> segments;
    for (auto& s : ingested) {
      if (s) segments.push_back(std::move(*s));
    }
    if (segments.empty()) {
      fail(ErrorKind::kEmpty,
           (origin.empty() ? std::string("build_bank") : origin) +
               ": every noise file is silent after filtering");
    }
    return NoiseBank(std::move(segments), band, target_rate, std::move(origin));
  }

  /// Loads a bank written by save().
  static NoiseBank load(const std::filesystem::path& dir) {
    const auto manifest_path = dir / kManifestName;
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorKind::kNotFound, manifest_path.string() + ": missing");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, manifest_path.string() + ": " + e.what());
    }
    try {
      const int rate = doc.at("sample_rate").get<int>();
      std::optional<BandSpec> band;
      if (!doc.at("band").is_null()) {
        band = BandSpec{doc["band"].at(0).get<double>(), doc["band"].at(1).get<double>()};
      }
      std::vector<Segment> segments;
      for (const auto& s : doc.at("segments")) {
        AudioBuffer audio = read_wav(dir / s.at("file").get<std::string>());
        require(audio.sample_rate() == rate,
                "bank segment rate differs from manifest", ErrorKind::kFormat);
        segments.push_back({s.at("source").get<std::string>(), std::move(audio)});
      }
      return NoiseBank(std::move(segments), band, rate, dir.string());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, manifest_path.string() + ": " + e.what());
    }
  }

  static bool is_prepared(const std::filesystem::path& dir) {
    std::error_code ec;
    return std::filesystem::is_regular_file(dir / kManifestName, ec);
  }

  /// Writes every segment as float32 WAV plus the bank.json manifest.
  void save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    nlohmann::json segs = nlohmann::json::array();
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      char name[32];
      std::snprintf(name, sizeof(name), "noise_%05zu.wav", i);
      write_wav(dir / name, s.audio, WavFormat::kFloat32);
      segs.push_back({{"file", name},
                      {"source", s.id},
                      {"samples", s.audio.size()},
                      {"rms_db", rms_db(s.audio)}});
    }
    nlohmann::json doc = {
        {"sample_rate", sample_rate_},
        {"band", band_ ? nlohmann::json::array({band_->low_hz, band_->high_hz})
                       : nlohmann::json(nullptr)},
        {"target_rms_db", kTargetRmsDb},
        {"segments", segs},
    };
    std::ofstream out(dir / kManifestName);
    if (!out) fail(ErrorKind::kIo, (dir / kManifestName).string() + ": cannot write");
    out << doc.dump(2) << "\n";
  }

  std::size_t size() const { return segments_.size(); }
  const Segment& segment(std::size_t i) const { return segments_.at(i); }
  const std::optional<BandSpec>& band() const { return band_; }
  int sample_rate() const { return sample_rate_; }
  const std::string& origin() const { return origin_; }

  /// Uniform segment; offset uniform over positions where a crop fits, or
  /// over the whole segment when it must loop.
  NoisePick pick(std::size_t length, RngStream& rng) const {
    NoisePick p;
    p.segment = rng.index(segments_.size());
    const std::size_t n = segments_[p.segment].audio.size();
    p.offset = n >= length ? rng.index(n - length + 1) : rng.index(n);
    return p;
  }

  AudioBuffer window(const NoisePick& p, std::size_t length) const {
    const auto& audio = segment(p.segment).audio;
    return AudioBuffer(loop_crop(audio.samples(), p.offset, length), sample_rate_);
  }

  AudioBuffer draw(std::size_t length, RngStream& rng) const {
    return window(pick(length, rng), length);
  }

 private:
  std::vector<Segment> segments_;
  std::optional<BandSpec> band_;
  int sample_rate_;
  std::string origin_;
};

}  // namespace cpcaug
